#include "addml/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace addml {

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ShapeError("scores and labels differ in length");
  const std::size_t n = scores.size();
  std::size_t positives = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw UndefinedAucError("labels must be 0 or 1");
    positives += static_cast<std::size_t>(l);
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) throw UndefinedAucError("AUC needs both classes");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of 1-based average ranks of the positives.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) {
      if (labels[order[t]] == 1) rank_sum += avg_rank;
    }
    i = j + 1;
  }
  const auto p = static_cast<double>(positives);
  const auto q = static_cast<double>(negatives);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, std::size_t k,
                                                       Rng& rng) {
  if (k < 2) throw ConfigError("need at least two folds");
  if (k > labels.size()) {
    throw ConfigError("cannot split " + std::to_string(labels.size()) + " rows into " + std::to_string(k) +
                      " folds");
  }
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t next = 0;
  for (int cls : {1, 0}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t i : members) {
      folds[next].push_back(i);
      next = (next + 1) % k;
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

std::string_view to_string(Setting setting) noexcept {
  switch (setting) {
    case Setting::seen:
      return "seen";
    case Setting::unseen:
      return "unseen";
    case Setting::one_class:
      return "one_class";
  }
  return "unknown";
}

Setting parse_setting(std::string_view text) {
  if (text == "seen") return Setting::seen;
  if (text == "unseen") return Setting::unseen;
  if (text == "one_class" || text == "one-class" || text == "oneclass") return Setting::one_class;
  throw ConfigError("unknown setting '" + std::string(text) + "'");
}

std::uint64_t fold_seed(std::uint64_t base_seed, std::size_t repeat) noexcept {
  return mix_seed(base_seed, 0x10000 + repeat);
}

std::uint64_t run_seed(std::uint64_t base_seed, std::size_t repeat, std::size_t fold) noexcept {
  return mix_seed(base_seed, 0x20000 + 0x100 * repeat + fold);
}

CvReport run_setting(const Dataset& dataset, const CvPlan& plan, const TrainConfig& config,
                     const ProgressLog& log) {
  const std::vector<int>& labels = dataset.require_labels();
  config.validate();
  const std::size_t n = dataset.size();
  const auto anomalies = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (anomalies == 0 || anomalies == n) throw UndefinedAucError("cross-validation needs both classes");
  if (plan.repeats == 0) throw ConfigError("need at least one repeat");

  CvReport report;
  report.setting = plan.setting;
  report.meta = {n, dataset.dims(), 100.0 * static_cast<double>(anomalies) / static_cast<double>(n)};

  TrainConfig run_config = config;
  if (plan.setting == Setting::one_class) {
    run_config.rho_n = 1.0;
    if (log) log("one_class: rho_n forced to 1");
  }

  for (std::size_t r = 0; r < plan.repeats; ++r) {
    Rng rng(fold_seed(plan.base_seed, r));
    const auto folds = stratified_folds(labels, plan.folds, rng);
    for (std::size_t f = 0; f < plan.folds; ++f) {
      std::vector<std::size_t> train_rows;
      for (std::size_t g = 0; g < plan.folds; ++g) {
        if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
      }
      std::sort(train_rows.begin(), train_rows.end());
      if (plan.setting == Setting::one_class) {
        std::erase_if(train_rows, [&](std::size_t i) { return labels[i] == 1; });
      }

      const Matrix train_raw = dataset.x.select_rows(train_rows);
      const Normalizer norm = fit_normalizer(train_raw);
      const Matrix train_x = norm.apply(train_raw);

      run_config.seed = run_seed(plan.base_seed, r, f);
      const TrainReport trained = train(train_x, run_config);
      const Scorer scorer =
          build_scorer(trained.best_net, train_x.select_rows(trained.train_rows), plan.score_mode);

      Vector scores;
      std::vector<int> target_labels;
      if (plan.setting == Setting::seen) {
        scores = score_all(scorer, train_x);
        for (std::size_t i : train_rows) target_labels.push_back(labels[i]);
      } else {
        scores = score_all(scorer, norm.apply(dataset.x.select_rows(folds[f])));
        for (std::size_t i : folds[f]) target_labels.push_back(labels[i]);
      }

      CvRun run;
      run.repeat = r;
      run.fold = f;
      run.setting = plan.setting;
      run.auc = roc_auc(scores, target_labels);
      run.epochs_run = trained.epochs_run;
      run.train_size = train_rows.size();
      for (std::size_t i : train_rows) run.train_anomalies += static_cast<std::size_t>(labels[i]);
      report.runs.push_back(run);
      if (log) {
        log(std::string(to_string(plan.setting)) + " repeat " + std::to_string(r) + " fold " +
            std::to_string(f) + ": auc " + std::to_string(run.auc) + " after " +
            std::to_string(run.epochs_run) + " epochs");
      }
    }
  }

  std::sort(report.runs.begin(), report.runs.end(), [](const CvRun& a, const CvRun& b) {
    return a.repeat != b.repeat ? a.repeat < b.repeat : a.fold < b.fold;
  });
  double sum = 0.0;
  for (const auto& run : report.runs) sum += run.auc;
  const auto count = static_cast<double>(report.runs.size());
  report.mean_auc = sum / count;
  double ss = 0.0;
  for (const auto& run : report.runs) ss += (run.auc - report.mean_auc) * (run.auc - report.mean_auc);
  report.std_auc = report.runs.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
  return report;
}

}  // namespace addml
