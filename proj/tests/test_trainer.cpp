#include <doctest.h>

#include <algorithm>
#include <set>

#include "addml/data_io.hpp"
#include "addml/evaluation.hpp"
#include "addml/scoring.hpp"
#include "addml/trainer.hpp"
#include "oracles.hpp"

using namespace addml;

namespace {

TrainConfig quick_config(std::uint64_t seed) {
  TrainConfig c;
  c.seed = seed;
  c.epochs = 8;
  c.batch_size = 64;
  c.metric_dim = 8;
  return c;
}

}  // namespace

TEST_CASE("validation split arithmetic") {
  Rng rng(61);
  const TrainSplit s = split_validation(100, 0.1, rng);
  CHECK(s.validation.size() == 10);
  CHECK(s.train.size() == 90);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  for (std::size_t v : s.validation) CHECK(all.insert(v).second);
  CHECK(all.size() == 100);
  CHECK(*all.rbegin() == 99);

  Rng a(7), b(7);
  const TrainSplit x = split_validation(57, 0.3, a);
  const TrainSplit y = split_validation(57, 0.3, b);
  CHECK(x.train == y.train);
  CHECK(x.validation == y.validation);

  Rng c(1);
  const TrainSplit none = split_validation(20, 0.0, c);
  CHECK(none.validation.empty());
  CHECK(none.train.size() == 20);
  CHECK_THROWS_AS(split_validation(1, 0.9, c), ConfigError);
  CHECK_THROWS_AS(split_validation(10, 1.0, c), ConfigError);
  CHECK_THROWS_AS(split_validation(0, 0.1, c), EmptyInputError);
}

TEST_CASE("minibatches partition the distilled rows") {
  std::vector<std::size_t> p(10);
  for (std::size_t i = 0; i < 10; ++i) p[i] = 3 * i + 1;
  Rng rng(62);
  const auto batches = build_minibatches(p, 4, LossKind::instance_closeness, rng);
  REQUIRE(batches.size() == 3);
  CHECK(batches[0].rows.size() == 4);
  CHECK(batches[1].rows.size() == 4);
  CHECK(batches[2].rows.size() == 2);
  CHECK(batches[0].pairs.size() == 6);
  CHECK(batches[2].pairs.size() == 1);
  std::vector<std::size_t> joined;
  for (const auto& mb : batches) joined.insert(joined.end(), mb.rows.begin(), mb.rows.end());
  std::sort(joined.begin(), joined.end());
  CHECK(joined == p);

  const auto center = build_minibatches(p, 4, LossKind::center_closeness, rng);
  CHECK(center[0].pairs.empty());
  CHECK_THROWS_AS(build_minibatches(std::vector<std::size_t>{}, 4, LossKind::center_closeness, rng),
                  EmptyInputError);
  CHECK_THROWS_AS(build_minibatches(std::vector<std::size_t>{3}, 4, LossKind::instance_closeness, rng),
                  EmptyInputError);
}

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.rho_n = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.rho_h = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.batch_size = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.loss = LossKind::center_closeness;
  CHECK_NOTHROW(c.validate());
  c = TrainConfig{};
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(parse_validation_cadence("per_epoch") == ValidationCadence::per_epoch);
  CHECK_THROWS_AS(parse_validation_cadence("hourly"), ConfigError);
}

TEST_CASE("single epoch smoke run") {
  Rng rng(63);
  const Matrix m = oracle::random_matrix(rng, 20, 4);
  TrainConfig c;
  c.epochs = 1;
  for (LossKind kind : {LossKind::instance_closeness, LossKind::center_closeness}) {
    c.loss = kind;
    const TrainReport r = train(m, c);
    REQUIRE(r.history.size() == 1);
    CHECK(r.epochs_run == 1);
    CHECK(std::isfinite(r.history[0].train_loss));
    REQUIRE(r.history[0].val_loss.has_value());
    CHECK(std::isfinite(*r.history[0].val_loss));
    CHECK(r.train_rows.size() == 18);
    CHECK(r.validation_rows.size() == 2);
    CHECK(r.history[0].distilled_size == 12);
    CHECK(r.best_net.output_dim() == 64);
    CHECK(r.best_net.all_finite());
  }
}

TEST_CASE("zero weights are a fixed point") {
  Rng rng(64);
  const Matrix m = oracle::random_matrix(rng, 40, 3);
  DenseLayer zero{Matrix(5, 3), Vector(5, 0.0)};
  TrainOptions opt;
  opt.initial_net = MetricNet({zero});
  TrainConfig c;
  c.epochs = 3;
  c.weight_decay = 0.0;
  c.batch_size = 8;
  for (LossKind kind : {LossKind::instance_closeness, LossKind::center_closeness}) {
    c.loss = kind;
    const TrainReport r = train(m, c, opt);
    for (const auto& e : r.history) {
      CHECK(e.train_loss == 0.0);
      CHECK(e.val_loss == 0.0);
    }
    CHECK(r.best_net.layers()[0].weight == zero.weight);
    CHECK(r.best_net.layers()[0].bias == zero.bias);
  }
}

TEST_CASE("two Gaussian fixture separates after training on itself") {
  const Dataset ds = synth_two_gaussians(200, 10, 10, 8.0, 2024);
  TrainConfig c;  // defaults
  c.seed = 5;
  const TrainReport r = train(ds.x, c);
  const Matrix m_train = ds.x.select_rows(r.train_rows);
  const Scorer s = build_scorer(r.best_net, m_train, ScoreMode::center);
  const Vector scores = score_all(s, ds.x);
  const double auc = roc_auc(scores, *ds.labels);
  CAPTURE(auc);
  CHECK(auc >= 0.95);
}

TEST_CASE("training is deterministic") {
  const Dataset ds = synth_two_gaussians(60, 5, 4, 4.0, 3);
  const TrainConfig c = quick_config(99);
  const TrainReport a = train(ds.x, c);
  const TrainReport b = train(ds.x, c);
  CHECK(a.validation_losses == b.validation_losses);
  CHECK(a.epochs_run == b.epochs_run);
  CHECK(a.final_distilled_rows == b.final_distilled_rows);
  for (std::size_t l = 0; l < a.best_net.depth(); ++l) {
    CHECK(a.best_net.layers()[l].weight == b.best_net.layers()[l].weight);
    CHECK(a.best_net.layers()[l].bias == b.best_net.layers()[l].bias);
  }
  const TrainReport other = train(ds.x, quick_config(100));
  CHECK(other.validation_losses != a.validation_losses);
}

TEST_CASE("best model dominates every checkpoint") {
  const Dataset ds = synth_two_gaussians(120, 6, 5, 5.0, 11);
  for (ValidationCadence cad : {ValidationCadence::per_minibatch, ValidationCadence::per_epoch}) {
    TrainConfig c = quick_config(12);
    c.batch_size = 16;
    c.validation_cadence = cad;
    const TrainReport r = train(ds.x, c);
    REQUIRE(r.best_val_loss.has_value());
    REQUIRE_FALSE(r.validation_losses.empty());
    for (double v : r.validation_losses) CHECK(*r.best_val_loss <= v);
    CHECK(*r.best_val_loss == *std::min_element(r.validation_losses.begin(), r.validation_losses.end()));
    if (cad == ValidationCadence::per_epoch) {
      CHECK(r.validation_losses.size() == static_cast<std::size_t>(r.epochs_run));
    }
  }
}

TEST_CASE("patience bounds the number of improvement-free epochs") {
  const Dataset ds = synth_two_gaussians(80, 4, 4, 4.0, 13);
  for (int patience : {1, 2, 3}) {
    TrainConfig c = quick_config(14);
    c.epochs = 40;
    c.patience = patience;
    c.learning_rate = 0.05;  // noisy enough to hit plateaus
    c.validation_cadence = ValidationCadence::per_epoch;
    const TrainReport r = train(ds.x, c);
    const auto& v = r.validation_losses;
    std::size_t best_epoch = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i] < v[best_epoch]) best_epoch = i;
    }
    const int after_best = r.epochs_run - static_cast<int>(best_epoch + 1);
    CHECK(after_best <= patience);
    if (r.stopped_early) CHECK(after_best == patience);
    if (!r.stopped_early) CHECK(r.epochs_run == c.epochs);
  }
}

TEST_CASE("no validation rows means the final net is kept") {
  const Dataset ds = synth_two_gaussians(30, 3, 3, 4.0, 15);
  TrainConfig c = quick_config(16);
  c.rho_v = 0.0;
  c.epochs = 4;
  const TrainReport r = train(ds.x, c);
  CHECK_FALSE(r.best_val_loss.has_value());
  CHECK(r.validation_losses.empty());
  CHECK(r.epochs_run == 4);
  CHECK(r.train_rows.size() == 33);
}

TEST_CASE("updates only touch the epoch's distilled rows") {
  const Dataset ds = synth_two_gaussians(100, 5, 4, 6.0, 17);
  TrainConfig c = quick_config(18);
  c.batch_size = 15;
  int epochs_seen = 0;
  std::set<std::size_t> validation_rows;
  TrainOptions opt;
  std::vector<std::vector<std::size_t>> distilled_rows;
  opt.on_epoch = [&](const EpochTrace& t) {
    ++epochs_seen;
    CHECK(t.epoch == epochs_seen);
    for (std::size_t u : t.updated_rows) {
      CHECK(std::binary_search(t.distilled.indices.begin(), t.distilled.indices.end(), u));
    }
    std::vector<std::size_t> rows;
    for (std::size_t i : t.distilled.indices) rows.push_back(t.train_rows[i]);
    distilled_rows.push_back(rows);
  };
  const TrainReport r = train(ds.x, c, opt);
  CHECK(epochs_seen == r.epochs_run);
  for (const auto& rows : distilled_rows) {
    for (std::size_t v : r.validation_rows) CHECK_FALSE(std::binary_search(rows.begin(), rows.end(), v));
  }
  CHECK(distilled_rows.back() == r.final_distilled_rows);
}

TEST_CASE("loss term count follows the distilled and batch sizes") {
  Rng rng(19);
  const Matrix m = oracle::random_matrix(rng, 100, 3);
  TrainConfig c;
  c.epochs = 1;
  c.rho_v = 0.0;
  c.batch_size = 10;
  c.metric_dim = 4;
  c.rho_n = 0.5;
  c.loss = LossKind::center_closeness;
  CHECK(train(m, c).history[0].loss_terms == 50);
  c.rho_n = 1.0;
  CHECK(train(m, c).history[0].loss_terms == 100);
  c.loss = LossKind::instance_closeness;
  CHECK(train(m, c).history[0].loss_terms == 10 * 45);
  c.rho_n = 0.5;
  const EpochRecord e = train(m, c).history[0];
  CHECK(e.loss_terms == 5 * 45);
  CHECK(e.batches == 5);
}

TEST_CASE("non-finite input is rejected") {
  Matrix m(5, 2);
  m(2, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(train(m, TrainConfig{}), NumericError);
  CHECK_THROWS_AS(train(Matrix(0, 3), TrainConfig{}), EmptyInputError);
  TrainConfig bad;
  bad.rho_n = 0.0;
  CHECK_THROWS_AS(train(Matrix(5, 2), bad), ConfigError);
}

TEST_CASE("a large learning rate with huge inputs stays finite or aborts cleanly") {
  Rng rng(20);
  const Matrix m = oracle::random_matrix(rng, 50, 3, 1e6);
  TrainConfig c = quick_config(21);
  c.learning_rate = 10.0;
  try {
    const TrainReport r = train(m, c);
    CHECK(r.best_net.all_finite());
  } catch (const NumericError&) {
    CHECK(true);
  }
}
