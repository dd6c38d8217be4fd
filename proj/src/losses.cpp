#include "addml/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "addml/kernels.hpp"

namespace addml {

std::string_view to_string(LossKind kind) noexcept {
  return kind == LossKind::instance_closeness ? "instance_closeness" : "center_closeness";
}

LossKind parse_loss_kind(std::string_view text) {
  if (text == "instance" || text == "instance_closeness") return LossKind::instance_closeness;
  if (text == "center" || text == "center_closeness") return LossKind::center_closeness;
  throw ConfigError("unknown loss kind '" + std::string(text) + "'");
}

std::vector<RowPair> unordered_pairs(std::size_t k) {
  std::vector<RowPair> pairs;
  pairs.reserve(k < 2 ? 0 : k * (k - 1) / 2);
  for (std::size_t i = 0; i + 1 < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      pairs.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
    }
  }
  return pairs;
}

namespace {

void check_mu(const Matrix& latents, std::span<const double> mu) {
  if (mu.size() != latents.cols()) {
    throw ShapeError("center has length " + std::to_string(mu.size()) + ", latents have " +
                     std::to_string(latents.cols()) + " columns");
  }
}

}  // namespace

DistanceSet pair_distances(const Matrix& latents) {
  DistanceSet set;
  set.provenance = DistanceSet::Provenance::pair_based;
  set.pairs = unordered_pairs(latents.rows());
  set.values.reserve(set.pairs.size());
  for (const RowPair& p : set.pairs) {
    set.values.push_back(kernels::squared_distance(latents.row(p.first), latents.row(p.second)));
  }
  return set;
}

DistanceSet center_distances(const Matrix& latents, std::span<const double> mu) {
  check_mu(latents, mu);
  DistanceSet set;
  set.provenance = DistanceSet::Provenance::center_based;
  set.values.reserve(latents.rows());
  for (std::size_t r = 0; r < latents.rows(); ++r) {
    set.values.push_back(kernels::squared_distance(latents.row(r), mu));
  }
  return set;
}

DistanceSet batch_distances(LossKind kind, const Matrix& latents, std::span<const double> mu) {
  return kind == LossKind::instance_closeness ? pair_distances(latents)
                                              : center_distances(latents, mu);
}

double instance_loss(const Matrix& latents) {
  const std::size_t k = latents.rows();
  if (k == 0) throw EmptyInputError("instance loss of an empty batch");
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      sum += kernels::squared_distance(latents.row(i), latents.row(j));
    }
  }
  const auto kk = static_cast<double>(k);
  return sum / (kk * kk);
}

double center_loss(const Matrix& latents, std::span<const double> mu) {
  if (latents.rows() == 0) throw EmptyInputError("center loss of an empty batch");
  check_mu(latents, mu);
  double sum = 0.0;
  for (std::size_t r = 0; r < latents.rows(); ++r) sum += kernels::squared_distance(latents.row(r), mu);
  return sum / static_cast<double>(latents.rows());
}

LossGradient loss_and_upstream(LossKind kind, const Matrix& latents, std::span<const double> mu,
                               std::span<const std::size_t> selected) {
  if (latents.rows() == 0) throw EmptyInputError("loss of an empty batch");
  if (selected.empty()) throw EmptyInputError("empty mining selection");
  check_mu(latents, mu);
  const std::size_t k = latents.rows();
  const std::size_t w = latents.cols();
  const double inv_count = 1.0 / static_cast<double>(selected.size());

  LossGradient out{0.0, Matrix(k, w)};
  Vector diff(w);
  auto diff_of = [&](std::span<const double> a, std::span<const double> b) {
    for (std::size_t c = 0; c < w; ++c) diff[c] = a[c] - b[c];
  };

  if (kind == LossKind::instance_closeness) {
    // Row i owns the (k-1-i) consecutive pair ids starting at row_start[i].
    std::vector<std::size_t> row_start(k, 0);
    for (std::size_t i = 1; i < k; ++i) row_start[i] = row_start[i - 1] + (k - i);
    const std::size_t pair_count = k * (k - 1) / 2;
    for (std::size_t id : selected) {
      if (id >= pair_count) throw SelectionError("pair id " + std::to_string(id) + " out of range");
      const auto it = std::upper_bound(row_start.begin(), row_start.begin() + (k - 1), id);
      const auto i = static_cast<std::size_t>(it - row_start.begin()) - 1;
      const std::size_t j = i + 1 + (id - row_start[i]);
      diff_of(latents.row(i), latents.row(j));
      out.value += kernels::squared_norm(diff);
      kernels::axpy(2.0 * inv_count, diff, out.upstream.row(i));
      kernels::axpy(-2.0 * inv_count, diff, out.upstream.row(j));
    }
  } else {
    for (std::size_t id : selected) {
      if (id >= k) throw SelectionError("row id " + std::to_string(id) + " out of range");
      diff_of(latents.row(id), mu);
      out.value += kernels::squared_norm(diff);
      kernels::axpy(2.0 * inv_count, diff, out.upstream.row(id));
    }
  }
  out.value *= inv_count;
  return out;
}

double squared_weight_norm(const MetricNet& net) {
  double sum = 0.0;
  for (const auto& layer : net.layers()) sum += kernels::squared_norm(layer.weight.data());
  return sum;
}

double regularized_loss(double raw_loss, const MetricNet& net, double lambda) {
  if (lambda < 0.0) throw ConfigError("weight decay must be nonnegative");
  const double total = raw_loss + 0.5 * lambda * squared_weight_norm(net);
  if (!std::isfinite(total)) throw NumericError("non-finite regularized loss");
  return total;
}

void add_weight_decay(GradientSet& grads, const MetricNet& net, double lambda) {
  if (lambda == 0.0) return;
  if (grads.layers.size() != net.depth()) throw ShapeError("gradient depth does not match network");
  for (std::size_t c = 0; c < net.depth(); ++c) {
    kernels::axpy(lambda, net.layers()[c].weight.data(), grads.layers[c].weight.data());
  }
}

double validation_loss(LossKind kind, const MetricNet& net, const Matrix& validation,
                       std::span<const double> mu, ValidationPairs pairs) {
  if (validation.rows() == 0) throw EmptyInputError("empty validation set");
  const Matrix latents = forward_batch(net, validation);
  double sum = 0.0;
  if (kind == LossKind::instance_closeness) {
    for (std::size_t i = 0; i + 1 < latents.rows(); ++i) {
      for (std::size_t j = i + 1; j < latents.rows(); ++j) {
        sum += kernels::squared_distance(latents.row(i), latents.row(j));
      }
    }
    // Ordered pairs count every distinct pair twice; self pairs add zero.
    if (pairs == ValidationPairs::all_ordered) sum *= 2.0;
  } else {
    check_mu(latents, mu);
    for (std::size_t r = 0; r < latents.rows(); ++r) sum += kernels::squared_distance(latents.row(r), mu);
  }
  return sum;
}

}  // namespace addml
