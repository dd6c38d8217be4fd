#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "addml/matrix.hpp"
#include "addml/nn.hpp"

namespace addml {

enum class LossKind { instance_closeness, center_closeness };

std::string_view to_string(LossKind kind) noexcept;
/// Accepts "instance", "instance_closeness", "center", "center_closeness".
LossKind parse_loss_kind(std::string_view text);

/// Unordered row pair (first < second) inside a batch.
struct RowPair {
  std::uint32_t first;
  std::uint32_t second;
  friend bool operator==(const RowPair&, const RowPair&) = default;
};

/// All pairs i < j of a k-row batch in lexicographic order. Pair ids used by
/// DistanceSet and loss_and_upstream index into this list.
std::vector<RowPair> unordered_pairs(std::size_t k);

/// Per-term squared distances of one batch. For pair-based sets, values[t]
/// belongs to pairs[t]; for center-based sets, values[t] belongs to row t.
struct DistanceSet {
  enum class Provenance { pair_based, center_based };

  Provenance provenance = Provenance::center_based;
  std::vector<double> values;
  std::vector<RowPair> pairs;

  std::size_t size() const noexcept { return values.size(); }
  bool empty() const noexcept { return values.empty(); }
};

/// Squared latent distances for every unordered pair of rows.
DistanceSet pair_distances(const Matrix& latents);
/// Squared latent distance of every row to mu.
DistanceSet center_distances(const Matrix& latents, std::span<const double> mu);
/// The distance terms a loss kind ranks and averages over.
DistanceSet batch_distances(LossKind kind, const Matrix& latents, std::span<const double> mu);

/// (1/k^2) * sum_{i<j} ||f_i - f_j||^2
double instance_loss(const Matrix& latents);
/// (1/k) * sum_i ||f_i - mu||^2
double center_loss(const Matrix& latents, std::span<const double> mu);

struct LossGradient {
  double value = 0.0;
  Matrix upstream;  // dloss/df(x_i), one row per batch row
};

/// Mean of the selected squared-distance terms and its gradient with respect
/// to each batch latent. mu is held constant. `selected` lists term ids:
/// pair ids (instance kind) or row ids (center kind).
LossGradient loss_and_upstream(LossKind kind, const Matrix& latents, std::span<const double> mu,
                               std::span<const std::size_t> selected);

/// Sum of squared weight entries across layers (biases excluded).
double squared_weight_norm(const MetricNet& net);
/// raw + (lambda / 2) * sum_c ||W_c||_F^2
double regularized_loss(double raw_loss, const MetricNet& net, double lambda);
/// Adds lambda * W_c to every weight gradient.
void add_weight_decay(GradientSet& grads, const MetricNet& net, double lambda);

/// Pair convention for the instance-kind validation loss.
enum class ValidationPairs {
  distinct_unordered,  // i < j, matches training pairs
  all_ordered,         // every (i, j) in V x V, self pairs included
};

/// Sum (not mean) of squared validation distance terms.
double validation_loss(LossKind kind, const MetricNet& net, const Matrix& validation,
                       std::span<const double> mu,
                       ValidationPairs pairs = ValidationPairs::distinct_unordered);

}  // namespace addml
