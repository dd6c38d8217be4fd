#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "addml/distill_mine.hpp"
#include "addml/losses.hpp"
#include "oracles.hpp"

using namespace addml;

TEST_CASE("instance_loss examples") {
  CHECK(instance_loss(Matrix{{0.3, 0.1}, {0.3, 0.1}, {0.3, 0.1}}) == 0.0);
  CHECK(instance_loss(Matrix{{0.0}, {2.0}}) == doctest::Approx(1.0).epsilon(1e-15));
  Rng rng(31);
  const Matrix f = oracle::random_matrix(rng, 16, 7);
  CHECK(instance_loss(f) == doctest::Approx(oracle::instance_loss(f)).epsilon(1e-12));
  CHECK_THROWS_AS(instance_loss(Matrix(0, 3)), EmptyInputError);
  CHECK(instance_loss(Matrix{{0.5, 0.5}}) == 0.0);
}

TEST_CASE("center_loss examples and the center identity") {
  CHECK(center_loss(Matrix{{1.0, 2.0}, {1.0, 2.0}}, Vector{1.0, 2.0}) == 0.0);
  CHECK(center_loss(Matrix{{0.0}, {2.0}}, Vector{1.0}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(center_loss(Matrix{{0.0}, {2.0}}, Vector{1.0}) == instance_loss(Matrix{{0.0}, {2.0}}));

  Rng rng(32);
  const Matrix f = oracle::random_matrix(rng, 32, 9);
  const double inst = instance_loss(f);
  const double cent = center_loss(f, column_mean(f));
  CHECK(std::abs(inst - cent) <= 1e-9 * std::abs(inst));

  CHECK_THROWS_AS(center_loss(Matrix(0, 2), Vector{0.0, 0.0}), EmptyInputError);
  CHECK_THROWS_AS(center_loss(Matrix{{1.0, 2.0}}, Vector{0.0}), ShapeError);
}

TEST_CASE("losses are nonnegative and invariant to row permutation") {
  Rng rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t k = 1 + rng.below(20);
    const std::size_t w = 1 + rng.below(8);
    const Matrix f = oracle::random_matrix(rng, k, w);
    const Vector mu = oracle::mean(f);
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(perm));
    const Matrix g = f.select_rows(perm);
    CHECK(instance_loss(f) >= 0.0);
    CHECK(center_loss(f, mu) >= 0.0);
    CHECK(instance_loss(g) == doctest::Approx(instance_loss(f)).epsilon(1e-12));
    CHECK(center_loss(g, mu) == doctest::Approx(center_loss(f, mu)).epsilon(1e-12));
  }
}

TEST_CASE("unordered_pairs enumerates i<j lexicographically") {
  const auto pairs = unordered_pairs(4);
  REQUIRE(pairs.size() == 6);
  CHECK(pairs[0] == RowPair{0, 1});
  CHECK(pairs[2] == RowPair{0, 3});
  CHECK(pairs[3] == RowPair{1, 2});
  CHECK(pairs[5] == RowPair{2, 3});
  CHECK(unordered_pairs(1).empty());
}

TEST_CASE("loss_and_upstream examples") {
  SUBCASE("center kind at its minimum") {
    const auto r = loss_and_upstream(LossKind::center_closeness, Matrix{{0.2, -0.4}}, Vector{0.2, -0.4},
                                     std::vector<std::size_t>{0});
    CHECK(r.value == 0.0);
    for (double v : r.upstream.data()) CHECK(v == 0.0);
  }
  SUBCASE("instance kind, single pair {0,2}") {
    const auto r = loss_and_upstream(LossKind::instance_closeness, Matrix{{0.0}, {2.0}}, Vector{1.0},
                                     std::vector<std::size_t>{0});
    CHECK(r.value == doctest::Approx(4.0));
    // d/df0 (f0 - f1)^2 = 2 (f0 - f1) = -4; d/df1 = +4
    CHECK(r.upstream(0, 0) == doctest::Approx(-4.0));
    CHECK(r.upstream(1, 0) == doctest::Approx(4.0));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(loss_and_upstream(LossKind::center_closeness, Matrix{{0.0}}, Vector{0.0}, {}),
                    EmptyInputError);
    CHECK_THROWS_AS(loss_and_upstream(LossKind::instance_closeness, Matrix{{0.0}, {1.0}}, Vector{0.0},
                                      std::vector<std::size_t>{1}),
                    SelectionError);
  }
}

TEST_CASE("loss_and_upstream upstream matches latent-space finite differences") {
  Rng rng(34);
  for (auto kind : {LossKind::center_closeness, LossKind::instance_closeness}) {
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t k = 2 + rng.below(9);
      const std::size_t w = 1 + rng.below(6);
      Matrix f = oracle::random_matrix(rng, k, w);
      const Vector mu = oracle::mean(oracle::random_matrix(rng, 3, w));
      const std::size_t terms = kind == LossKind::instance_closeness ? k * (k - 1) / 2 : k;
      std::vector<std::size_t> selected;
      for (std::size_t t = 0; t < terms; ++t) {
        if (rng.uniform() < 0.5) selected.push_back(t);
      }
      if (selected.empty()) selected.push_back(terms - 1);
      const auto r = loss_and_upstream(kind, f, mu, selected);
      CHECK(r.value == doctest::Approx(oracle::selected_loss(kind, f, mu, selected)).epsilon(1e-13));
      const double h = 1e-5;
      for (std::size_t i = 0; i < f.data().size(); ++i) {
        const double saved = f.data()[i];
        f.data()[i] = saved + h;
        const double up = oracle::selected_loss(kind, f, mu, selected);
        f.data()[i] = saved - h;
        const double down = oracle::selected_loss(kind, f, mu, selected);
        f.data()[i] = saved;
        const double numeric = (up - down) / (2 * h);
        const double analytic = r.upstream.data()[i];
        CHECK(std::abs(analytic - numeric) <= 1e-6 * std::max(1.0, std::abs(numeric)));
      }
    }
  }
}

TEST_CASE("mined loss is at least the full mean when keeping the largest terms") {
  Rng rng(35);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix f = oracle::random_matrix(rng, 2 + rng.below(15), 3);
    const Vector mu = column_mean(f);
    for (auto kind : {LossKind::center_closeness, LossKind::instance_closeness}) {
      const DistanceSet d = batch_distances(kind, f, mu);
      std::vector<std::size_t> all(d.size());
      std::iota(all.begin(), all.end(), std::size_t{0});
      const double full = loss_and_upstream(kind, f, mu, all).value;
      const MinedSelection q = mine(d, 0.3);
      CHECK(loss_and_upstream(kind, f, mu, q.kept).value >= full * (1 - 1e-12));
    }
  }
}

TEST_CASE("regularized_loss adds half lambda times the squared weights") {
  MetricNet net({{Matrix{{2.0}}, Vector{5.0}}});
  CHECK(regularized_loss(0.7, net, 0.0) == 0.7);
  CHECK(regularized_loss(0.0, net, 1e-5) == doctest::Approx(2e-5).epsilon(1e-14));
  Rng rng(36);
  const MetricNet r = oracle::random_net(rng, {5, 4, 3});
  double sq = 0.0;
  for (const auto& l : r.layers())
    for (std::size_t i = 0; i < l.weight.rows(); ++i)
      for (std::size_t j = 0; j < l.weight.cols(); ++j) sq += l.weight(i, j) * l.weight(i, j);
  CHECK(regularized_loss(1.25, r, 3e-3) == doctest::Approx(1.25 + 1.5e-3 * sq).epsilon(1e-15));
  CHECK_THROWS_AS(regularized_loss(1.0, r, -1.0), ConfigError);

  GradientSet g = GradientSet::zeros_like(net);
  add_weight_decay(g, net, 0.1);
  CHECK(g.layers[0].weight(0, 0) == doctest::Approx(0.2));
  CHECK(g.layers[0].bias[0] == 0.0);
}

TEST_CASE("validation_loss sums squared distance terms") {
  MetricNet zero({{Matrix(2, 3), Vector(2, 0.0)}});
  CHECK(validation_loss(LossKind::center_closeness, zero, Matrix{{1.0, 2.0, 3.0}}, Vector{0.0, 0.0}) == 0.0);
  Rng rng(37);
  const MetricNet net = oracle::random_net(rng, {3, 4});
  CHECK(validation_loss(LossKind::instance_closeness, net, Matrix{{0.1, 0.2, 0.3}, {0.1, 0.2, 0.3}}, Vector(4)) ==
        0.0);

  const Matrix v = oracle::random_matrix(rng, 5, 3);
  const Matrix f = oracle::forward_batch(net, v);
  double distinct = 0.0;
  double ordered = 0.0;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      const double d = oracle::sqdist(&f(i, 0), &f(j, 0), 4);
      ordered += d;
      if (i < j) distinct += d;
    }
  const Vector mu = oracle::mean(f);
  double center = 0.0;
  for (std::size_t i = 0; i < 5; ++i) center += oracle::sqdist(&f(i, 0), mu.data(), 4);

  CHECK(validation_loss(LossKind::instance_closeness, net, v, mu) == doctest::Approx(distinct).epsilon(1e-12));
  CHECK(validation_loss(LossKind::instance_closeness, net, v, mu, ValidationPairs::all_ordered) ==
        doctest::Approx(ordered).epsilon(1e-12));
  CHECK(validation_loss(LossKind::center_closeness, net, v, mu) == doctest::Approx(center).epsilon(1e-12));
  CHECK_THROWS_AS(validation_loss(LossKind::center_closeness, net, Matrix(0, 3), mu), EmptyInputError);
}

TEST_CASE("loss kind parsing") {
  CHECK(parse_loss_kind("instance") == LossKind::instance_closeness);
  CHECK(parse_loss_kind("center_closeness") == LossKind::center_closeness);
  CHECK_THROWS_AS(parse_loss_kind("triplet"), ConfigError);
}
