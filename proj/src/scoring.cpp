#include "addml/scoring.hpp"

#include <string>

#include "addml/kernels.hpp"

namespace addml {

std::string_view to_string(ScoreMode mode) noexcept {
  return mode == ScoreMode::center ? "center" : "dissimilarity";
}

ScoreMode parse_score_mode(std::string_view text) {
  if (text == "center") return ScoreMode::center;
  if (text == "dissimilarity") return ScoreMode::dissimilarity;
  throw ConfigError("unknown scoring mode '" + std::string(text) + "'");
}

Scorer::Scorer(MetricNet net, Vector mu, std::optional<Matrix> retrieval, ScoreMode mode)
    : net_(std::move(net)), mu_(std::move(mu)), retrieval_(std::move(retrieval)), mode_(mode) {
  if (mu_.size() != net_.output_dim()) throw ShapeError("center length does not match network output");
  if (mode_ == ScoreMode::dissimilarity) {
    if (!retrieval_ || retrieval_->rows() == 0) {
      throw ModeError("dissimilarity scoring requires a retrieval set");
    }
  }
  if (retrieval_ && retrieval_->cols() != net_.output_dim()) {
    throw ShapeError("retrieval latents do not match network output");
  }
}

double Scorer::score(std::span<const double> x) const {
  return mode_ == ScoreMode::center ? score_center(*this, x) : score_dissimilarity(*this, x);
}

Scorer build_scorer(const MetricNet& net, const Matrix& m, ScoreMode mode) {
  if (m.rows() == 0) throw EmptyInputError("scorer needs a nonempty training set");
  Matrix latents = forward_batch(net, m);
  Vector mu = column_mean(latents);
  std::optional<Matrix> retrieval;
  if (mode == ScoreMode::dissimilarity) retrieval = std::move(latents);
  return Scorer(net, std::move(mu), std::move(retrieval), mode);
}

double score_center(const Scorer& scorer, std::span<const double> x) {
  const Vector f = forward(scorer.net(), x);
  return kernels::squared_distance(f, scorer.mu());
}

double score_dissimilarity(const Scorer& scorer, std::span<const double> x) {
  if (scorer.mode() != ScoreMode::dissimilarity || !scorer.retrieval()) {
    throw ModeError("dissimilarity scoring requested from a center-mode scorer");
  }
  const Vector f = forward(scorer.net(), x);
  const Matrix& r = *scorer.retrieval();
  double sum = 0.0;
  for (std::size_t j = 0; j < r.rows(); ++j) sum += kernels::squared_distance(f, r.row(j));
  return sum / static_cast<double>(r.rows());
}

Vector score_all(const Scorer& scorer, const Matrix& x) {
  Vector out;
  out.reserve(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out.push_back(scorer.score(x.row(r)));
  return out;
}

Decision decide(double score, double tau) noexcept {
  return Decision{score, score > tau ? 1 : 0, tau};
}

}  // namespace addml
