#include "addml/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "addml/rng.hpp"

namespace addml {

const std::vector<int>& Dataset::require_labels() const {
  if (!labels) throw ConfigError("dataset '" + source + "' has no label column");
  return *labels;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_number(std::string_view field) {
  if (field.empty()) return std::nullopt;
  if (field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) return std::nullopt;
  return v;
}

}  // namespace

Dataset parse_csv(std::istream& in, const std::optional<LabelColumn>& label_column, bool has_header,
                  const std::string& source) {
  Dataset ds;
  ds.source = source;
  std::optional<std::size_t> label_index;
  if (label_column && std::holds_alternative<std::size_t>(*label_column)) {
    label_index = std::get<std::size_t>(*label_column);
  }
  if (label_column && std::holds_alternative<std::string>(*label_column) && !has_header) {
    throw ConfigError("label column given by name but the file has no header");
  }

  std::vector<double> values;
  std::vector<int> labels;
  std::optional<std::size_t> width;  // total fields per row
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (header_pending) {
      header_pending = false;
      width = fields.size();
      if (label_column && std::holds_alternative<std::string>(*label_column)) {
        const auto& name = std::get<std::string>(*label_column);
        const auto it = std::find(fields.begin(), fields.end(), name);
        if (it == fields.end()) throw ParseError("label column '" + name + "' not in header", line_no);
        label_index = static_cast<std::size_t>(it - fields.begin());
      }
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (label_index && i == *label_index) continue;
        ds.feature_names.emplace_back(fields[i]);
      }
      continue;
    }
    if (!width) width = fields.size();
    if (fields.size() != *width) {
      throw ParseError("expected " + std::to_string(*width) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    if (label_index && *label_index >= *width) {
      throw ParseError("label column index " + std::to_string(*label_index) + " out of range", line_no);
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto v = parse_number(fields[i]);
      if (!v) throw ParseError("non-numeric cell '" + std::string(fields[i]) + "'", line_no);
      if (label_index && i == *label_index) {
        if (*v != 0.0 && *v != 1.0) {
          throw ParseError("label '" + std::string(fields[i]) + "' is not 0 or 1", line_no);
        }
        labels.push_back(*v == 1.0 ? 1 : 0);
      } else {
        if (!std::isfinite(*v)) throw ParseError("non-finite cell", line_no);
        values.push_back(*v);
      }
    }
  }
  const std::size_t cols = width ? *width - (label_index ? 1 : 0) : 0;
  const std::size_t rows = cols == 0 ? 0 : values.size() / cols;
  if (cols == 0 && !labels.empty()) throw ParseError("no feature columns", line_no);
  if (rows == 0) throw EmptyInputError("'" + source + "' contains no data rows");
  ds.x = Matrix(rows, cols, std::move(values));
  if (label_index) ds.labels = std::move(labels);
  return ds;
}

Dataset load_csv(const std::string& path, const std::optional<LabelColumn>& label_column,
                 bool has_header) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return parse_csv(in, label_column, has_header, path);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const Dataset& dataset) {
  const std::size_t d = dataset.dims();
  std::string line;
  for (std::size_t c = 0; c < d; ++c) {
    if (c) line += ',';
    line += c < dataset.feature_names.size() ? dataset.feature_names[c] : "x" + std::to_string(c);
  }
  if (dataset.labels) line += d ? ",label" : "label";
  out << line << '\n';
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    line.clear();
    for (std::size_t c = 0; c < d; ++c) {
      if (c) line += ',';
      line += format_double(dataset.x(r, c));
    }
    if (dataset.labels) line += "," + std::to_string((*dataset.labels)[r]);
    out << line << '\n';
  }
}

Normalizer fit_normalizer(const Matrix& x_fit) {
  if (x_fit.rows() == 0) throw EmptyInputError("cannot fit a normalizer on an empty matrix");
  Normalizer n;
  n.mean = column_mean(x_fit);
  n.stddev.assign(x_fit.cols(), 0.0);
  for (std::size_t c = 0; c < x_fit.cols(); ++c) {
    const double first = x_fit(0, c);
    bool constant = true;
    double ss = 0.0;
    for (std::size_t r = 0; r < x_fit.rows(); ++r) {
      const double v = x_fit(r, c);
      constant = constant && v == first;
      ss += (v - n.mean[c]) * (v - n.mean[c]);
    }
    if (constant) {
      n.mean[c] = first;
      n.stddev[c] = 1.0;
      continue;
    }
    const double sd = std::sqrt(ss / static_cast<double>(x_fit.rows()));
    n.stddev[c] = sd > 0.0 ? sd : 1.0;
  }
  return n;
}

Matrix Normalizer::apply(const Matrix& x) const {
  if (x.cols() != mean.size()) throw ShapeError("normalizer dimension does not match data");
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = (x(r, c) - mean[c]) / stddev[c];
  }
  return out;
}

Dataset synth_two_gaussians(std::size_t n_normal, std::size_t n_anomaly, std::size_t d,
                            double separation, std::uint64_t seed) {
  if (d == 0) throw ConfigError("dimension must be positive");
  if (!(separation >= 0.0)) throw ConfigError("separation must be nonnegative");
  Rng rng(seed);
  Vector direction(d);
  double norm = 0.0;
  while (norm == 0.0) {
    for (double& v : direction) v = rng.normal();
    norm = 0.0;
    for (double v : direction) norm += v * v;
    norm = std::sqrt(norm);
  }
  for (double& v : direction) v /= norm;

  Dataset ds;
  ds.source = "synthetic";
  ds.x = Matrix(n_normal + n_anomaly, d);
  ds.labels = std::vector<int>(n_normal + n_anomaly, 0);
  for (std::size_t r = 0; r < n_normal + n_anomaly; ++r) {
    const bool anomaly = r >= n_normal;
    for (std::size_t c = 0; c < d; ++c) {
      ds.x(r, c) = rng.normal() + (anomaly ? separation * direction[c] : 0.0);
    }
    (*ds.labels)[r] = anomaly ? 1 : 0;
  }
  for (std::size_t c = 0; c < d; ++c) ds.feature_names.push_back("x" + std::to_string(c));
  return ds;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("write to '" + tmp + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot rename into '" + path + "'");
  }
}

}  // namespace addml
