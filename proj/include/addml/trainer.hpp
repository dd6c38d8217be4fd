#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "addml/distill_mine.hpp"
#include "addml/losses.hpp"
#include "addml/matrix.hpp"
#include "addml/nn.hpp"
#include "addml/rng.hpp"

namespace addml {

enum class ValidationCadence { per_epoch, per_minibatch };

std::string_view to_string(ValidationCadence cadence) noexcept;
ValidationCadence parse_validation_cadence(std::string_view text);

struct TrainConfig {
  int epochs = 50;
  std::size_t batch_size = 256;
  double rho_n = 2.0 / 3.0;
  double rho_h = 1.0 / 3.0;
  double rho_v = 0.1;
  int patience = 5;
  double weight_decay = 1e-5;
  double learning_rate = 1e-3;
  std::size_t metric_dim = 64;
  std::vector<std::size_t> hidden_dims;
  LossKind loss = LossKind::instance_closeness;
  std::uint64_t seed = 0;
  ValidationCadence validation_cadence = ValidationCadence::per_minibatch;
  ValidationPairs validation_pairs = ValidationPairs::distinct_unordered;

  /// Throws ConfigError naming the first violated constraint.
  void validate() const;
};

struct TrainSplit {
  std::vector<std::size_t> train;       // ascending row ids
  std::vector<std::size_t> validation;  // ascending row ids
};

/// Uniform random split of n rows; |validation| = round-half-up(rho_v * n).
TrainSplit split_validation(std::size_t n, double rho_v, Rng& rng);

struct MiniBatch {
  std::vector<std::size_t> rows;  // ids into the training partition
  std::vector<RowPair> pairs;     // positions within `rows`; instance kind only
};

/// Shuffles the distilled ids once and cuts consecutive blocks of b.
std::vector<MiniBatch> build_minibatches(std::span<const std::size_t> distilled, std::size_t b,
                                         LossKind kind, Rng& rng);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;             // mean regularized mini-batch loss
  std::optional<double> val_loss;      // last validation loss of the epoch
  std::size_t distilled_size = 0;      // |P|
  double tau_n = 0.0;
  std::size_t batches = 0;
  std::size_t loss_terms = 0;          // distance terms computed over the epoch
};

struct TrainReport {
  MetricNet best_net;
  std::optional<double> best_val_loss;  // empty when validation is disabled
  int epochs_run = 0;
  bool stopped_early = false;
  std::vector<EpochRecord> history;
  std::vector<double> validation_losses;   // every checkpoint, in order
  std::vector<std::size_t> train_rows;     // rows of M after the validation split
  std::vector<std::size_t> validation_rows;
  std::vector<std::size_t> final_distilled_rows;  // rows of M in the last epoch's P
};

/// Per-epoch view handed to TrainOptions::on_epoch after the epoch's updates.
struct EpochTrace {
  int epoch;
  const DistilledSet& distilled;             // indices into the training partition
  std::span<const std::size_t> train_rows;   // training partition -> rows of M
  std::span<const std::size_t> updated_rows; // partition ids used in weight updates
};

struct TrainOptions {
  std::optional<MetricNet> initial_net;  // replaces Glorot initialization
  std::function<void(const EpochTrace&)> on_epoch;
};

TrainReport train(const Matrix& m, const TrainConfig& config, const TrainOptions& options = {});

}  // namespace addml
