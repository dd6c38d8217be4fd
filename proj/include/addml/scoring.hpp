#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "addml/matrix.hpp"
#include "addml/nn.hpp"

namespace addml {

enum class ScoreMode { center, dissimilarity };

std::string_view to_string(ScoreMode mode) noexcept;
ScoreMode parse_score_mode(std::string_view text);

/// Frozen model plus the latent center of its training partition. A
/// dissimilarity-mode scorer also keeps every training latent.
class Scorer {
 public:
  Scorer(MetricNet net, Vector mu, std::optional<Matrix> retrieval, ScoreMode mode);

  const MetricNet& net() const noexcept { return net_; }
  const Vector& mu() const noexcept { return mu_; }
  const std::optional<Matrix>& retrieval() const noexcept { return retrieval_; }
  ScoreMode mode() const noexcept { return mode_; }

  /// Score under the scorer's own mode.
  double score(std::span<const double> x) const;

 private:
  MetricNet net_;
  Vector mu_;
  std::optional<Matrix> retrieval_;
  ScoreMode mode_;
};

/// m is the training data after the validation split.
Scorer build_scorer(const MetricNet& net, const Matrix& m, ScoreMode mode);

/// ||f(x) - mu||^2. Cost does not depend on the training set size.
double score_center(const Scorer& scorer, std::span<const double> x);
/// (1/|M|) * sum_j ||f(x) - f(x_j)||^2; requires a dissimilarity-mode scorer.
double score_dissimilarity(const Scorer& scorer, std::span<const double> x);

/// Scores every row of x under the scorer's mode.
Vector score_all(const Scorer& scorer, const Matrix& x);

struct Decision {
  double score;
  int label;  // 1 anomaly, 0 normal
  double tau;
};

/// Anomaly iff score > tau.
Decision decide(double score, double tau) noexcept;

}  // namespace addml
