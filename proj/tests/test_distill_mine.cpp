#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "addml/distill_mine.hpp"
#include "oracles.hpp"

using namespace addml;

namespace {

std::vector<double> random_values(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-5.0, 5.0);
  return v;
}

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("ratio_count rounds half up and never returns zero for nonempty input") {
  CHECK(ratio_count(0.5, 4) == 2);
  CHECK(ratio_count(0.25, 4) == 1);
  CHECK(ratio_count(1.0 / 3.0, 6) == 2);
  CHECK(ratio_count(2.0 / 3.0, 10) == 7);
  CHECK(ratio_count(0.05, 5) == 1);  // 0.25 rounds to 0, clamped to 1
  CHECK(ratio_count(0.3, 5) == 2);   // 1.5 rounds up
  CHECK(ratio_count(1.0, 7) == 7);
  CHECK(ratio_count(0.5, 0) == 0);
}

TEST_CASE("smallest_k examples") {
  const std::vector<double> a{3, 1, 2, 1};
  CHECK(smallest_k(a, 2) == std::vector<double>{1, 1});
  CHECK(smallest_k(a, 4) == sorted(a));
  CHECK(smallest_k(a, 0).empty());
  CHECK_THROWS_AS(smallest_k(a, 5), SelectionError);

  Rng rng(41);
  const auto v = random_values(rng, 1000);
  auto oracle_sorted = sorted(v);
  oracle_sorted.resize(137);
  CHECK(smallest_k(v, 137) == oracle_sorted);
}

TEST_CASE("largest_k examples") {
  const std::vector<double> a{0.5, 0.9, 0.1};
  CHECK(largest_k(a, 1) == std::vector<double>{0.9});
  CHECK(largest_k(a, 0).empty());
  CHECK_THROWS_AS(largest_k(a, 4), SelectionError);

  Rng rng(42);
  const auto v = random_values(rng, 1000);
  auto desc = sorted(v);
  std::reverse(desc.begin(), desc.end());
  desc.resize(251);
  CHECK(largest_k(v, 251) == desc);
}

TEST_CASE("ties resolve by lowest original index") {
  const std::vector<double> flat{1, 1, 1, 1};
  CHECK(smallest_k_indices(flat, 2) == std::vector<std::size_t>{0, 1});
  CHECK(largest_k_indices(flat, 2) == std::vector<std::size_t>{0, 1});
  const std::vector<double> v{2, 5, 2, 5, 2};
  CHECK(smallest_k_indices(v, 2) == std::vector<std::size_t>{0, 2});
  CHECK(largest_k_indices(v, 1) == std::vector<std::size_t>{1});
}

TEST_CASE("smallest_k and largest_k of the complement partition the multiset") {
  Rng rng(43);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + rng.below(60);
    std::vector<double> v(n);
    // Few distinct values, so ties are common.
    for (double& x : v) x = static_cast<double>(rng.below(6));
    const std::size_t k = rng.below(n + 1);
    auto joined = smallest_k(v, k);
    const auto rest = largest_k(v, n - k);
    joined.insert(joined.end(), rest.begin(), rest.end());
    CHECK(sorted(joined) == sorted(v));
    if (k > 0 && k < n) CHECK(smallest_k(v, k).back() <= rest.back());
  }
}

TEST_CASE("distillation ranking example") {
  const std::vector<double> dist{0.01, 0.25, 0.04, 0.81};
  const DistilledSet p = select_distilled(dist, 0.5);
  CHECK(p.indices == std::vector<std::size_t>{0, 2});
  CHECK(p.tau_n == 0.04);
  const DistilledSet all = select_distilled(dist, 1.0);
  CHECK(all.indices == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(all.tau_n == 0.81);
  CHECK_THROWS_AS(select_distilled(dist, 0.0), ConfigError);
  CHECK_THROWS_AS(select_distilled(dist, 1.5), ConfigError);
}

TEST_CASE("distill matches a sort-distances-take-prefix oracle") {
  Rng rng(44);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 5 + rng.below(80);
    const MetricNet net = oracle::random_net(rng, {4, 3});
    const Matrix m = oracle::random_matrix(rng, n, 4, 2.0);
    const double rho = 0.05 + 0.95 * rng.uniform();
    const DistilledSet p = distill(net, m, rho);

    const Matrix f = oracle::forward_batch(net, m);
    const Vector mu = oracle::mean(f);
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t i = 0; i < n; ++i) ranked.push_back({oracle::sqdist(&f(i, 0), mu.data(), 3), i});
    std::sort(ranked.begin(), ranked.end());
    const auto k = static_cast<std::size_t>(std::max(1.0, std::floor(rho * static_cast<double>(n) + 0.5)));
    std::vector<std::size_t> expected;
    for (std::size_t i = 0; i < k; ++i) expected.push_back(ranked[i].second);
    std::sort(expected.begin(), expected.end());
    CHECK(p.indices == expected);
    CHECK(p.tau_n == doctest::Approx(ranked[k - 1].first).epsilon(1e-12));
    for (std::size_t i : p.indices) CHECK(i < n);
  }
  CHECK_THROWS_AS(distill(oracle::random_net(rng, {4, 3}), Matrix(0, 4), 0.5), EmptyInputError);
}

TEST_CASE("distill is monotone in rho_n and the identity at rho_n = 1") {
  Rng rng(45);
  const MetricNet net = oracle::random_net(rng, {6, 5});
  const Matrix m = oracle::random_matrix(rng, 90, 6);
  CHECK(distill(net, m, 1.0).indices.size() == 90);
  std::vector<std::size_t> previous;
  for (double rho = 0.05; rho <= 1.0001; rho += 0.05) {
    const auto current = distill(net, m, std::min(rho, 1.0)).indices;
    CHECK(std::includes(current.begin(), current.end(), previous.begin(), previous.end()));
    previous = current;
  }
}

TEST_CASE("mine examples") {
  DistanceSet d;
  d.values = {4.0, 1.0, 9.0, 1.0};
  const MinedSelection q = mine(d, 0.25);
  CHECK(q.kept == std::vector<std::size_t>{2});
  CHECK(q.tau_h == 9.0);
  CHECK(mine(d, 1.0).kept == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(mine(d, 0.01).kept.size() == 1);
  CHECK_THROWS_AS(mine(DistanceSet{}, 0.5), EmptyInputError);

  Rng rng(46);
  for (int trial = 0; trial < 20; ++trial) {
    DistanceSet r;
    r.values = random_values(rng, 1 + rng.below(300));
    for (double& v : r.values) v = v * v;
    const double rho = 0.05 + 0.95 * rng.uniform();
    const MinedSelection sel = mine(r, rho);
    std::vector<double> kept;
    for (std::size_t i : sel.kept) kept.push_back(r.values[i]);
    std::sort(kept.begin(), kept.end(), std::greater<>());
    CHECK(kept == largest_k(r.values, ratio_count(rho, r.size())));
    // Every kept term is at least every dropped term.
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!std::binary_search(sel.kept.begin(), sel.kept.end(), i)) CHECK(r.values[i] <= sel.tau_h);
    }
  }
}
