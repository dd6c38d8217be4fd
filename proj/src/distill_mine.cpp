#include "addml/distill_mine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "addml/kernels.hpp"

namespace addml {

std::size_t ratio_count(double ratio, std::size_t n) {
  if (n == 0) return 0;
  const double scaled = std::floor(ratio * static_cast<double>(n) + 0.5);
  if (!(scaled >= 1.0)) return 1;
  return std::min(n, static_cast<std::size_t>(scaled));
}

namespace {

void check_k(std::span<const double> values, std::size_t k) {
  if (k > values.size()) {
    throw SelectionError("cannot select " + std::to_string(k) + " of " +
                         std::to_string(values.size()) + " elements");
  }
}

// Ranks indices by `before` (a strict total order over (value, index)) and
// keeps the first k, returned in ascending index order.
template <typename Before>
std::vector<std::size_t> first_k(std::span<const double> values, std::size_t k, Before before) {
  check_k(values, k);
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (k < idx.size()) {
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), before);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

std::vector<std::size_t> smallest_k_indices(std::span<const double> values, std::size_t k) {
  return first_k(values, k, [&](std::size_t a, std::size_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });
}

std::vector<std::size_t> largest_k_indices(std::span<const double> values, std::size_t k) {
  return first_k(values, k, [&](std::size_t a, std::size_t b) {
    return values[a] > values[b] || (values[a] == values[b] && a < b);
  });
}

std::vector<double> smallest_k(std::span<const double> values, std::size_t k) {
  std::vector<double> out;
  for (std::size_t i : smallest_k_indices(values, k)) out.push_back(values[i]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> largest_k(std::span<const double> values, std::size_t k) {
  std::vector<double> out;
  for (std::size_t i : largest_k_indices(values, k)) out.push_back(values[i]);
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

DistilledSet select_distilled(std::span<const double> center_distances, double rho_n, int epoch) {
  if (center_distances.empty()) throw EmptyInputError("distillation of an empty training set");
  if (!(rho_n > 0.0 && rho_n <= 1.0)) throw ConfigError("rho_n must lie in (0, 1]");
  DistilledSet out;
  out.epoch = epoch;
  out.indices = smallest_k_indices(center_distances, ratio_count(rho_n, center_distances.size()));
  for (std::size_t i : out.indices) out.tau_n = std::max(out.tau_n, center_distances[i]);
  return out;
}

DistilledSet distill_latents(const Matrix& latents, double rho_n, int epoch) {
  if (latents.rows() == 0) throw EmptyInputError("distillation of an empty training set");
  Vector center = column_mean(latents);
  const DistanceSet dist = center_distances(latents, center);
  DistilledSet out = select_distilled(dist.values, rho_n, epoch);
  out.center = std::move(center);
  return out;
}

DistilledSet distill(const MetricNet& net, const Matrix& m, double rho_n, int epoch) {
  if (m.rows() == 0) throw EmptyInputError("distillation of an empty training set");
  return distill_latents(forward_batch(net, m), rho_n, epoch);
}

MinedSelection mine(const DistanceSet& distances, double rho_h) {
  if (distances.empty()) throw EmptyInputError("mining over an empty distance set");
  if (!(rho_h > 0.0 && rho_h <= 1.0)) throw ConfigError("rho_h must lie in (0, 1]");
  MinedSelection out;
  out.kept = largest_k_indices(distances.values, ratio_count(rho_h, distances.size()));
  out.tau_h = distances.values[out.kept.front()];
  for (std::size_t i : out.kept) out.tau_h = std::min(out.tau_h, distances.values[i]);
  return out;
}

}  // namespace addml
