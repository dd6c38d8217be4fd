#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "addml/losses.hpp"
#include "addml/matrix.hpp"
#include "addml/nn.hpp"

namespace addml {

/// K = max(1, round-half-up(ratio * n)), capped at n. Returns 0 only for n = 0.
std::size_t ratio_count(double ratio, std::size_t n);

// Order statistics with deterministic ties: among equal values the lower
// original index ranks first for smallest_k and is kept first for largest_k.

/// Indices of the k smallest values, sorted ascending by index.
std::vector<std::size_t> smallest_k_indices(std::span<const double> values, std::size_t k);
/// Indices of the k largest values, sorted ascending by index.
std::vector<std::size_t> largest_k_indices(std::span<const double> values, std::size_t k);

/// Multiset of the k smallest values, in ascending value order.
std::vector<double> smallest_k(std::span<const double> values, std::size_t k);
/// Multiset of the k largest values, in descending value order.
std::vector<double> largest_k(std::span<const double> values, std::size_t k);

/// Training rows kept for one epoch: the ratio of rows closest to the center.
struct DistilledSet {
  std::vector<std::size_t> indices;  // ascending row ids into M
  double tau_n = 0.0;                // largest kept squared center distance
  int epoch = 0;
  Vector center;                     // mu over all of M
};

/// Ranking step alone: keeps the ratio of rows with the smallest squared
/// center distances. `center` is left empty.
DistilledSet select_distilled(std::span<const double> center_distances, double rho_n, int epoch = 0);

/// Distillation from precomputed latents of the full training partition.
DistilledSet distill_latents(const Matrix& latents, double rho_n, int epoch = 0);
DistilledSet distill(const MetricNet& net, const Matrix& m, double rho_n, int epoch = 0);

/// Hardest distance terms of one mini-batch.
struct MinedSelection {
  std::vector<std::size_t> kept;  // ascending term ids
  double tau_h = 0.0;             // smallest kept distance
};

MinedSelection mine(const DistanceSet& distances, double rho_h);

}  // namespace addml
