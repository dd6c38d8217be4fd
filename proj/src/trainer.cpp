#include "addml/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace addml {

std::string_view to_string(ValidationCadence cadence) noexcept {
  return cadence == ValidationCadence::per_epoch ? "per_epoch" : "per_minibatch";
}

ValidationCadence parse_validation_cadence(std::string_view text) {
  if (text == "per_epoch" || text == "epoch") return ValidationCadence::per_epoch;
  if (text == "per_minibatch" || text == "minibatch") return ValidationCadence::per_minibatch;
  throw ConfigError("unknown validation cadence '" + std::string(text) + "'");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (loss == LossKind::instance_closeness && batch_size < 2) {
    throw ConfigError("instance closeness loss needs batch size >= 2");
  }
  if (!(rho_n > 0.0 && rho_n <= 1.0)) throw ConfigError("rho_n must lie in (0, 1]");
  if (!(rho_h > 0.0 && rho_h <= 1.0)) throw ConfigError("rho_h must lie in (0, 1]");
  if (!(rho_v >= 0.0 && rho_v < 1.0)) throw ConfigError("rho_v must lie in [0, 1)");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw ConfigError("weight decay must be a finite nonnegative number");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be positive");
  }
  if (metric_dim < 1) throw ConfigError("metric dimension must be >= 1");
  if (std::any_of(hidden_dims.begin(), hidden_dims.end(), [](std::size_t v) { return v == 0; })) {
    throw ConfigError("hidden layer widths must be >= 1");
  }
}

TrainSplit split_validation(std::size_t n, double rho_v, Rng& rng) {
  if (!(rho_v >= 0.0 && rho_v < 1.0)) throw ConfigError("rho_v must lie in [0, 1)");
  if (n == 0) throw EmptyInputError("cannot split an empty training set");
  const auto n_val = static_cast<std::size_t>(std::floor(rho_v * static_cast<double>(n) + 0.5));
  if (n_val >= n) {
    throw ConfigError("validation split of " + std::to_string(n_val) + " leaves no training rows out of " +
                      std::to_string(n));
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(perm));
  TrainSplit split;
  split.validation.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_val), perm.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

std::vector<MiniBatch> build_minibatches(std::span<const std::size_t> distilled, std::size_t b,
                                         LossKind kind, Rng& rng) {
  if (distilled.empty()) throw EmptyInputError("no distilled rows to batch");
  if (b == 0) throw ConfigError("batch size must be >= 1");
  if (kind == LossKind::instance_closeness && distilled.size() < 2) {
    throw EmptyInputError("instance closeness loss needs at least two distilled rows");
  }
  std::vector<std::size_t> order(distilled.begin(), distilled.end());
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<MiniBatch> batches;
  batches.reserve((order.size() + b - 1) / b);
  for (std::size_t start = 0; start < order.size(); start += b) {
    const std::size_t end = std::min(order.size(), start + b);
    MiniBatch batch;
    batch.rows.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                      order.begin() + static_cast<std::ptrdiff_t>(end));
    if (kind == LossKind::instance_closeness) batch.pairs = unordered_pairs(batch.rows.size());
    batches.push_back(std::move(batch));
  }
  return batches;
}

namespace {

void require_finite(double v, const char* what, int epoch) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string("non-finite ") + what + " in epoch " + std::to_string(epoch));
  }
}

}  // namespace

TrainReport train(const Matrix& m, const TrainConfig& config, const TrainOptions& options) {
  config.validate();
  if (m.rows() == 0 || m.cols() == 0) throw EmptyInputError("training matrix is empty");
  for (double v : m.data()) {
    if (!std::isfinite(v)) throw NumericError("training matrix contains non-finite values");
  }

  MetricNet net;
  if (options.initial_net) {
    net = *options.initial_net;
    if (net.input_dim() != m.cols()) throw ShapeError("initial network does not match data dimension");
  } else {
    const auto dims = architecture(m.cols(), config.hidden_dims, config.metric_dim);
    net = init_glorot(dims, mix_seed(config.seed, 1));
  }

  Rng split_rng(mix_seed(config.seed, 2));
  Rng batch_rng(mix_seed(config.seed, 3));

  TrainReport report;
  TrainSplit split = split_validation(m.rows(), config.rho_v, split_rng);
  const Matrix train_part = m.select_rows(split.train);
  const Matrix validation = m.select_rows(split.validation);
  const bool validate = validation.rows() > 0;
  if (config.loss == LossKind::instance_closeness && train_part.rows() < 2) {
    throw EmptyInputError("instance closeness loss needs at least two training rows");
  }

  AdamState adam = AdamState::for_net(net, AdamConfig{config.learning_rate});
  double best = std::numeric_limits<double>::infinity();
  MetricNet best_net = net;
  int patience_left = config.patience;
  DistilledSet distilled;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (patience_left == 0) {
      report.stopped_early = true;
      break;
    }

    // mu and P from the current net over the whole training partition.
    distilled = distill_latents(forward_batch(net, train_part), config.rho_n, epoch);
    const Vector& mu = distilled.center;

    EpochRecord record;
    record.epoch = epoch;
    record.distilled_size = distilled.indices.size();
    record.tau_n = distilled.tau_n;

    bool improved = false;
    auto checkpoint = [&] {
      const double v = validation_loss(config.loss, net, validation, mu, config.validation_pairs);
      require_finite(v, "validation loss", epoch);
      report.validation_losses.push_back(v);
      record.val_loss = v;
      if (v < best) {
        best = v;
        best_net = net;
        improved = true;
      }
    };

    const auto batches = build_minibatches(distilled.indices, config.batch_size, config.loss, batch_rng);
    std::vector<std::size_t> updated;
    double loss_sum = 0.0;
    for (const MiniBatch& batch : batches) {
      // A trailing single-row block has no pairs to learn from.
      if (config.loss == LossKind::instance_closeness && batch.rows.size() < 2) continue;
      const Matrix x = train_part.select_rows(batch.rows);
      const Matrix latents = forward_batch(net, x);
      const DistanceSet distances = batch_distances(config.loss, latents, mu);
      const MinedSelection hardest = mine(distances, config.rho_h);
      const LossGradient raw = loss_and_upstream(config.loss, latents, mu, hardest.kept);
      const double loss = regularized_loss(raw.value, net, config.weight_decay);
      require_finite(loss, "training loss", epoch);

      GradientSet grads = backward(net, x, raw.upstream);
      add_weight_decay(grads, net, config.weight_decay);
      adam_step(net, grads, adam);
      if (!net.all_finite()) throw NumericError("non-finite parameters in epoch " + std::to_string(epoch));

      loss_sum += loss;
      record.batches += 1;
      record.loss_terms += distances.size();
      updated.insert(updated.end(), batch.rows.begin(), batch.rows.end());
      if (validate && config.validation_cadence == ValidationCadence::per_minibatch) checkpoint();
    }
    if (validate && config.validation_cadence == ValidationCadence::per_epoch) checkpoint();
    record.train_loss = record.batches > 0 ? loss_sum / static_cast<double>(record.batches) : 0.0;

    if (validate) patience_left = improved ? config.patience : patience_left - 1;
    report.history.push_back(record);
    report.epochs_run = epoch;

    if (options.on_epoch) {
      std::sort(updated.begin(), updated.end());
      options.on_epoch(EpochTrace{epoch, distilled, split.train, updated});
    }
  }

  report.best_net = validate ? std::move(best_net) : net;
  if (validate && std::isfinite(best)) report.best_val_loss = best;
  report.final_distilled_rows.reserve(distilled.indices.size());
  for (std::size_t i : distilled.indices) report.final_distilled_rows.push_back(split.train[i]);
  report.train_rows = std::move(split.train);
  report.validation_rows = std::move(split.validation);
  return report;
}

}  // namespace addml
