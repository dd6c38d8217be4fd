#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "addml/matrix.hpp"
#include "addml/nn.hpp"
#include "addml/scoring.hpp"

namespace addml {

struct Dataset {
  Matrix x;
  std::optional<std::vector<int>> labels;  // 1 anomaly, 0 normal
  std::vector<std::string> feature_names;  // empty without a header
  std::string source;

  std::size_t size() const noexcept { return x.rows(); }
  std::size_t dims() const noexcept { return x.cols(); }
  /// Throws ConfigError when the dataset carries no labels.
  const std::vector<int>& require_labels() const;
};

/// Label column selected by header name or zero-based column index.
using LabelColumn = std::variant<std::string, std::size_t>;

/// Comma-separated numeric rows, optional header line, optional label column
/// holding 0/1. Blank lines are skipped. Errors carry the 1-based line number.
Dataset load_csv(const std::string& path, const std::optional<LabelColumn>& label_column,
                 bool has_header);
Dataset parse_csv(std::istream& in, const std::optional<LabelColumn>& label_column, bool has_header,
                  const std::string& source = "<stream>");

/// Writes features (and a trailing "label" column when labels exist) with
/// shortest round-trip formatting, so parse_csv reproduces the values exactly.
void write_csv(std::ostream& out, const Dataset& dataset);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Per-feature z-score statistics.
struct Normalizer {
  Vector mean;
  Vector stddev;  // population std; 1 for constant columns

  Matrix apply(const Matrix& x) const;
};

Normalizer fit_normalizer(const Matrix& x_fit);

/// Normals ~ N(0, I_d); anomalies ~ N(separation * u, I_d) for one random
/// unit direction u. Rows: normals first, then anomalies.
Dataset synth_two_gaussians(std::size_t n_normal, std::size_t n_anomaly, std::size_t d,
                            double separation, std::uint64_t seed);

/// Everything needed to score new data with a trained model.
struct ModelArtifact {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::uint32_t version = kFormatVersion;
  MetricNet net;
  Vector mu;
  ScoreMode mode = ScoreMode::center;
  std::optional<Matrix> retrieval;
  std::optional<Normalizer> normalizer;
  std::string prng;             // generator used in training
  std::string config_snapshot;  // key=value;... of the training config
  std::uint32_t checksum = 0;   // crc32 of the serialized bytes; set by save/load

  Scorer scorer() const;
};

/// Binary form; see README for the layout.
std::string serialize_model(const ModelArtifact& artifact);
ModelArtifact deserialize_model(const std::string& bytes);

/// Writes via a temporary file and rename.
void save_model(const ModelArtifact& artifact, const std::string& path);
/// Throws FormatError on bad magic, version mismatch, checksum failure or truncation.
ModelArtifact load_model(const std::string& path);

/// Writes `contents` to path through a temp file and rename.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace addml
