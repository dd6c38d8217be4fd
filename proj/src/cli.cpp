#include "addml/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "addml/data_io.hpp"
#include "addml/evaluation.hpp"
#include "addml/kernels.hpp"
#include "addml/report_io.hpp"
#include "addml/trainer.hpp"

namespace addml::cli {
namespace {

struct DataOptions {
  std::string path;
  std::string label_name;
  int label_index = -1;
  bool no_header = false;

  std::optional<LabelColumn> label() const {
    if (!label_name.empty()) return LabelColumn{label_name};
    if (label_index >= 0) return LabelColumn{static_cast<std::size_t>(label_index)};
    return std::nullopt;
  }

  Dataset load() const { return load_csv(path, label(), !no_header); }
};

struct ConfigOptions {
  TrainConfig config;
  std::string loss = "instance";
  std::string hidden;
  std::string cadence = "per_minibatch";
  std::string validation_pairs = "distinct";

  TrainConfig resolve() const {
    TrainConfig c = config;
    c.loss = parse_loss_kind(loss);
    c.validation_cadence = parse_validation_cadence(cadence);
    if (validation_pairs == "distinct") {
      c.validation_pairs = ValidationPairs::distinct_unordered;
    } else if (validation_pairs == "ordered") {
      c.validation_pairs = ValidationPairs::all_ordered;
    } else {
      throw ConfigError("validation pairs must be 'distinct' or 'ordered'");
    }
    c.hidden_dims.clear();
    std::string_view rest = hidden;
    while (!rest.empty()) {
      const std::size_t comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      std::size_t v = 0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc() || ptr != item.data() + item.size() || v == 0) {
        throw ConfigError("hidden dims must be a comma-separated list of positive integers");
      }
      c.hidden_dims.push_back(v);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    c.validate();
    return c;
  }
};

void add_data_options(CLI::App* cmd, DataOptions& d, bool labels_required) {
  cmd->add_option("--data", d.path, "CSV dataset")->required();
  auto* name = cmd->add_option("--label", d.label_name, "label column name (values 0/1)");
  auto* index = cmd->add_option("--label-index", d.label_index, "zero-based label column index");
  name->excludes(index);
  if (labels_required) {
    cmd->callback([&d] {
      if (d.label_name.empty() && d.label_index < 0) {
        throw CLI::ValidationError("--label", "a label column is required for this command");
      }
    });
  }
  cmd->add_flag("--no-header", d.no_header, "first line is data, not a header");
}

void add_config_options(CLI::App* cmd, ConfigOptions& o) {
  TrainConfig& c = o.config;
  cmd->add_option("--epochs", c.epochs, "n, maximum number of epochs")->capture_default_str();
  cmd->add_option("--batch-size", c.batch_size, "b, mini-batch size")->capture_default_str();
  cmd->add_option("--rho-n", c.rho_n, "data distillation ratio in (0,1]")->capture_default_str();
  cmd->add_option("--rho-h", c.rho_h, "hard mining ratio in (0,1]")->capture_default_str();
  cmd->add_option("--rho-v", c.rho_v, "validation split ratio in [0,1)")->capture_default_str();
  cmd->add_option("--patience", c.patience, "epochs without validation improvement")->capture_default_str();
  cmd->add_option("--lambda", c.weight_decay, "weight decay")->capture_default_str();
  cmd->add_option("--lr", c.learning_rate, "Adam learning rate")->capture_default_str();
  cmd->add_option("--metric-dim", c.metric_dim, "w, metric space dimension")->capture_default_str();
  cmd->add_option("--hidden-dims", o.hidden, "comma-separated hidden layer widths");
  cmd->add_option("--seed", c.seed, "base random seed")->capture_default_str();
  cmd->add_option("--loss", o.loss, "instance | center")->capture_default_str();
  cmd->add_option("--validation-cadence", o.cadence, "per_minibatch | per_epoch")->capture_default_str();
  cmd->add_option("--validation-pairs", o.validation_pairs, "distinct | ordered")->capture_default_str();
}

std::string config_snapshot(const TrainConfig& c) {
  std::ostringstream s;
  s << "epochs=" << c.epochs << ";batch_size=" << c.batch_size << ";rho_n=" << format_double(c.rho_n)
    << ";rho_h=" << format_double(c.rho_h) << ";rho_v=" << format_double(c.rho_v)
    << ";patience=" << c.patience << ";lambda=" << format_double(c.weight_decay)
    << ";lr=" << format_double(c.learning_rate) << ";metric_dim=" << c.metric_dim << ";hidden_dims=";
  for (std::size_t i = 0; i < c.hidden_dims.size(); ++i) s << (i ? "," : "") << c.hidden_dims[i];
  s << ";loss=" << to_string(c.loss) << ";seed=" << c.seed
    << ";validation_cadence=" << to_string(c.validation_cadence);
  return s.str();
}

std::vector<Setting> parse_settings(const std::string& text) {
  if (text == "all") return {Setting::seen, Setting::unseen, Setting::one_class};
  std::vector<Setting> out;
  std::string_view rest = text;
  while (!rest.empty()) {
    const std::size_t comma = rest.find(',');
    out.push_back(parse_setting(rest.substr(0, comma)));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
  }
  if (out.empty()) throw ConfigError("no setting given");
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  if (text.empty()) {
    for (int i = 1; i <= 20; ++i) grid.push_back(0.05 * i);
    grid.back() = 1.0;
    return grid;
  }
  std::string_view rest = text;
  while (!rest.empty()) {
    const std::size_t comma = rest.find(',');
    const std::string item(rest.substr(0, comma));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || item.empty()) throw ConfigError("grid values must be numbers");
    if (!(v > 0.0 && v <= 1.0)) throw ConfigError("grid values must lie in (0, 1]");
    grid.push_back(v);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
  }
  return grid;
}

std::string percent(double auc) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << 100.0 * auc << "%";
  return s.str();
}

struct Invocation {
  DataOptions data;
  ConfigOptions config;
  bool quiet = false;

  // train
  std::string model_out;
  std::string history_out;
  std::string store_mode = "center";
  bool no_normalize = false;

  // score / eval
  std::string model_in;
  std::string score_mode;
  std::optional<double> tau;
  std::string output;

  // cv / sweep
  std::string settings = "all";
  std::size_t folds = 3;
  std::size_t repeats = 3;
  std::string report_out;
  std::string parameter = "rho_n";
  std::string grid;
  std::string curve_out;
};

void emit(const std::string& path, const std::string& contents, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << contents;
  } else {
    write_file_atomic(path, contents);
  }
}

int cmd_train(const Invocation& inv, std::ostream& out, std::ostream& err) {
  const TrainConfig config = inv.config.resolve();
  const ScoreMode mode = parse_score_mode(inv.store_mode);
  // Labels, if present, are dropped unread.
  Dataset ds = inv.data.load();
  if (ds.size() == 0) throw EmptyInputError("dataset '" + ds.source + "' has no rows");
  std::optional<Normalizer> norm;
  Matrix x = ds.x;
  if (!inv.no_normalize) {
    norm = fit_normalizer(ds.x);
    x = norm->apply(ds.x);
  }
  if (!inv.quiet) err << "training on " << ds.size() << " rows x " << ds.dims() << " features\n";
  const TrainReport report = train(x, config);
  const Scorer scorer = build_scorer(report.best_net, x.select_rows(report.train_rows), mode);

  ModelArtifact artifact;
  artifact.net = scorer.net();
  artifact.mu = scorer.mu();
  artifact.mode = mode;
  artifact.retrieval = scorer.retrieval();
  artifact.normalizer = norm;
  artifact.prng = Rng::kAlgorithm;
  artifact.config_snapshot = config_snapshot(config);
  save_model(artifact, inv.model_out);
  const std::string history_path = inv.history_out.empty() ? inv.model_out + ".history.csv" : inv.history_out;
  write_file_atomic(history_path, history_csv(report));

  out << "epochs_run " << report.epochs_run << (report.stopped_early ? " (early stop)" : "") << "\n";
  out << "best_validation_loss "
      << (report.best_val_loss ? format_double(*report.best_val_loss) : std::string("n/a")) << "\n";
  out << "distilled_sizes";
  for (const auto& e : report.history) out << ' ' << e.distilled_size;
  out << "\n";
  return kExitOk;
}

Matrix model_input(const ModelArtifact& artifact, const Dataset& ds) {
  if (ds.dims() != artifact.net.input_dim()) {
    throw ShapeError("dataset has " + std::to_string(ds.dims()) + " features, model expects " +
                     std::to_string(artifact.net.input_dim()));
  }
  return artifact.normalizer ? artifact.normalizer->apply(ds.x) : ds.x;
}

Vector score_with(const ModelArtifact& artifact, const std::string& requested, const Matrix& x) {
  ScoreMode mode = requested.empty() ? artifact.mode : parse_score_mode(requested);
  if (mode == ScoreMode::dissimilarity && !artifact.retrieval) {
    throw ModeError("dissimilarity scoring needs a model trained with --store-mode dissimilarity");
  }
  const Scorer scorer(artifact.net, artifact.mu, artifact.retrieval, mode);
  return score_all(scorer, x);
}

int cmd_score(const Invocation& inv, std::ostream& out, std::ostream& err) {
  if (inv.tau && !std::isfinite(*inv.tau)) throw ConfigError("tau must be finite");
  const ModelArtifact artifact = load_model(inv.model_in);
  const Dataset ds = inv.data.load();
  const Vector scores = score_with(artifact, inv.score_mode, model_input(artifact, ds));
  emit(inv.output, scores_csv(scores, inv.tau), out);
  if (!inv.quiet) err << "scored " << scores.size() << " rows\n";
  return kExitOk;
}

int cmd_eval(const Invocation& inv, std::ostream& out, std::ostream&) {
  const ModelArtifact artifact = load_model(inv.model_in);
  const Dataset ds = inv.data.load();
  const auto& labels = ds.require_labels();
  const Vector scores = score_with(artifact, inv.score_mode, model_input(artifact, ds));
  const double auc = roc_auc(scores, labels);
  out << "auc " << format_double(auc) << " (" << percent(auc) << ")\n";
  return kExitOk;
}

std::vector<CvReport> run_cv(const Dataset& ds, const Invocation& inv, const TrainConfig& config,
                             std::ostream& err) {
  std::vector<CvReport> reports;
  const ProgressLog log = [&](std::string_view line) {
    if (!inv.quiet) err << line << "\n";
  };
  for (Setting s : parse_settings(inv.settings)) {
    CvPlan plan;
    plan.folds = inv.folds;
    plan.repeats = inv.repeats;
    plan.base_seed = config.seed;
    plan.setting = s;
    reports.push_back(run_setting(ds, plan, config, log));
  }
  return reports;
}

int cmd_cv(const Invocation& inv, std::ostream& out, std::ostream& err) {
  const TrainConfig config = inv.config.resolve();
  parse_settings(inv.settings);
  const Dataset ds = inv.data.load();
  ds.require_labels();
  const auto reports = run_cv(ds, inv, config, err);
  if (!inv.report_out.empty()) write_file_atomic(inv.report_out, cv_report_csv(reports));
  for (const auto& r : reports) {
    out << to_string(r.setting) << " mean AUC " << percent(r.mean_auc) << " over " << r.runs.size() << " runs\n";
  }
  return kExitOk;
}

int cmd_sweep(const Invocation& inv, std::ostream& out, std::ostream& err) {
  TrainConfig base = inv.config.resolve();
  if (inv.parameter != "rho_n" && inv.parameter != "rho_h") {
    throw ConfigError("sweep parameter must be rho_n or rho_h");
  }
  const std::vector<double> grid = parse_grid(inv.grid);
  parse_settings(inv.settings);
  const Dataset ds = inv.data.load();
  ds.require_labels();
  std::vector<CurvePoint> points;
  for (double v : grid) {
    TrainConfig c = base;
    (inv.parameter == "rho_n" ? c.rho_n : c.rho_h) = v;
    if (!inv.quiet) err << inv.parameter << " = " << format_double(v) << "\n";
    for (auto& report : run_cv(ds, inv, c, err)) {
      out << inv.parameter << "=" << format_double(v) << " " << to_string(report.setting) << " mean AUC "
          << percent(report.mean_auc) << "\n";
      points.push_back({v, std::move(report)});
    }
  }
  if (!inv.curve_out.empty()) write_file_atomic(inv.curve_out, curve_csv(inv.parameter, points));
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Invocation inv;
  CLI::App app{"Unsupervised anomaly detection via deep metric learning"};
  app.name("addml");
  app.require_subcommand(1);
  app.add_flag("-q,--quiet", inv.quiet, "suppress progress output");

  auto* train_cmd = app.add_subcommand("train", "train a model and write it to a file");
  add_data_options(train_cmd, inv.data, false);
  add_config_options(train_cmd, inv.config);
  train_cmd->add_option("--model-out", inv.model_out, "model file to write")->required();
  train_cmd->add_option("--history-out", inv.history_out, "training history CSV (default <model-out>.history.csv)");
  train_cmd->add_option("--store-mode", inv.store_mode, "center | dissimilarity (keeps retrieval set)")
      ->capture_default_str();
  train_cmd->add_flag("--no-normalize", inv.no_normalize, "skip z-score normalization");

  auto* score_cmd = app.add_subcommand("score", "score rows with a trained model");
  add_data_options(score_cmd, inv.data, false);
  score_cmd->add_option("--model", inv.model_in, "model file")->required();
  score_cmd->add_option("--mode", inv.score_mode, "center | dissimilarity (default: model's mode)");
  score_cmd->add_option("--tau", inv.tau, "threshold; adds an anomaly column (score > tau)");
  score_cmd->add_option("--output,-o", inv.output, "scores CSV (default stdout)");

  auto* eval_cmd = app.add_subcommand("eval", "ROC-AUC of a trained model on labeled data");
  add_data_options(eval_cmd, inv.data, true);
  eval_cmd->add_option("--model", inv.model_in, "model file")->required();
  eval_cmd->add_option("--mode", inv.score_mode, "center | dissimilarity (default: model's mode)");

  auto* cv_cmd = app.add_subcommand("cv", "repeated stratified cross-validation");
  add_data_options(cv_cmd, inv.data, true);
  add_config_options(cv_cmd, inv.config);
  cv_cmd->add_option("--setting", inv.settings, "seen | unseen | one_class | all, comma-separated")
      ->capture_default_str();
  cv_cmd->add_option("--folds", inv.folds, "folds per repeat")->capture_default_str();
  cv_cmd->add_option("--repeats", inv.repeats, "repeats")->capture_default_str();
  cv_cmd->add_option("--report-out", inv.report_out, "cross-validation report CSV");

  auto* sweep_cmd = app.add_subcommand("sweep", "cross-validate over a grid of rho_n or rho_h");
  add_data_options(sweep_cmd, inv.data, true);
  add_config_options(sweep_cmd, inv.config);
  sweep_cmd->add_option("--param", inv.parameter, "rho_n | rho_h")->capture_default_str();
  sweep_cmd->add_option("--grid", inv.grid, "comma-separated values (default 0.05..1.00 step 0.05)");
  sweep_cmd->add_option("--setting", inv.settings, "seen | unseen | one_class | all")->capture_default_str();
  sweep_cmd->add_option("--folds", inv.folds, "folds per repeat")->capture_default_str();
  sweep_cmd->add_option("--repeats", inv.repeats, "repeats")->capture_default_str();
  sweep_cmd->add_option("--curve-out", inv.curve_out, "curve CSV");

  std::vector<std::string> argv_storage{"addml"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsageError;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(inv, out, err);
    if (score_cmd->parsed()) return cmd_score(inv, out, err);
    if (eval_cmd->parsed()) return cmd_eval(inv, out, err);
    if (cv_cmd->parsed()) return cmd_cv(inv, out, err);
    if (sweep_cmd->parsed()) return cmd_sweep(inv, out, err);
  } catch (const ConfigError& e) {
    err << "addml: " << e.what() << "\n";
    return kExitUsageError;
  } catch (const std::exception& e) {
    err << "addml: " << e.what() << "\n";
    return kExitEngineError;
  }
  return kExitUsageError;
}

}  // namespace addml::cli
