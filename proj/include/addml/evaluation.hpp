#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "addml/data_io.hpp"
#include "addml/rng.hpp"
#include "addml/scoring.hpp"
#include "addml/trainer.hpp"

namespace addml {

/// Mann-Whitney AUC: probability that a random anomaly (label 1) outscores a
/// random normal (label 0), ties counting one half. Uses average ranks.
/// Throws UndefinedAucError unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// k disjoint folds; each class is shuffled and dealt round-robin, the deal
/// continuing across classes, so fold sizes and per-class counts differ by <= 1.
std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, std::size_t k,
                                                       Rng& rng);

enum class Setting { seen, unseen, one_class };

std::string_view to_string(Setting setting) noexcept;
Setting parse_setting(std::string_view text);

struct CvPlan {
  std::size_t folds = 3;
  std::size_t repeats = 3;
  std::uint64_t base_seed = 0;
  Setting setting = Setting::unseen;
  ScoreMode score_mode = ScoreMode::center;
};

/// Seed for the fold assignment of one repeat.
std::uint64_t fold_seed(std::uint64_t base_seed, std::size_t repeat) noexcept;
/// Training seed of one (repeat, fold) run; shared by every setting.
std::uint64_t run_seed(std::uint64_t base_seed, std::size_t repeat, std::size_t fold) noexcept;

struct CvRun {
  std::size_t repeat = 0;
  std::size_t fold = 0;
  Setting setting = Setting::unseen;
  double auc = 0.0;
  int epochs_run = 0;
  std::size_t train_size = 0;  // rows handed to the trainer
  std::size_t train_anomalies = 0;
};

struct DatasetMeta {
  std::size_t instances = 0;
  std::size_t dims = 0;
  double outlier_percent = 0.0;
};

struct CvReport {
  Setting setting = Setting::unseen;
  std::vector<CvRun> runs;  // sorted by (repeat, fold)
  double mean_auc = 0.0;
  double std_auc = 0.0;     // sample standard deviation (n - 1)
  DatasetMeta meta;
};

using ProgressLog = std::function<void(std::string_view)>;

/// Repeated stratified cross-validation for one setting. Each run z-scores
/// with statistics of its own training partition; one_class drops labeled
/// anomalies from that partition first and trains with rho_n = 1.
CvReport run_setting(const Dataset& dataset, const CvPlan& plan, const TrainConfig& config,
                     const ProgressLog& log = {});

}  // namespace addml
