#include "fnirs/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>

#include "fnirs/checkpoint.hpp"
#include "fnirs/config.hpp"
#include "fnirs/experiment.hpp"
#include "fnirs/gradcheck_suite.hpp"
#include "fnirs/synthgen.hpp"

namespace fnirs {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 7;
  bool seed_given = false;
};

CliConfig resolve_config(const CommonOptions& o) {
  CliConfig cfg = o.config_path.empty() ? parse_config("") : load_config(o.config_path);
  if (o.seed_given) cfg.seed = o.seed;
  cfg.synth.seed = cfg.seed;
  cfg.train.seed = cfg.seed;
  return cfg;
}

fs::path manifest_path(const std::string& data) {
  const fs::path p(data);
  return fs::is_directory(p) ? p / "manifest.csv" : p;
}

std::vector<Recording> load_recordings(const std::string& data, const CliConfig& cfg) {
  auto recs = load_dataset(manifest_path(data));
  if (cfg.standardize)
    for (auto& r : recs) r = standardize_channels(r);
  return recs;
}

std::vector<ModelKind> parse_models(const std::string& models) {
  if (models == "all") return {std::begin(kAllModelKinds), std::end(kAllModelKinds)};
  std::vector<ModelKind> out;
  std::size_t pos = 0;
  while (pos <= models.size()) {
    const auto comma = models.find(',', pos);
    const std::string name = models.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      out.push_back(model_kind_from_string(name));
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string(e.what()) + " (expected mlp, lstm_fwd, lstm_bwd, bilstm or all)");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

void print_table(std::ostream& out, const std::vector<RunReport>& reports) {
  out << std::left << std::setw(10) << "model" << std::right << std::setw(10) << "accuracy" << std::setw(13)
      << "sensitivity" << std::setw(13) << "specificity" << '\n';
  for (const auto& r : reports)
    out << std::left << std::setw(10) << to_string(r.model) << std::right << std::setw(10)
        << format_percent(r.metrics.accuracy) << std::setw(13) << format_percent(r.metrics.sensitivity)
        << std::setw(13) << format_percent(r.metrics.specificity) << '\n';
}

int cmd_synth(const CommonOptions& o, std::ostream& out) {
  const CliConfig cfg = resolve_config(o);
  const SyntheticDataset data = generate_dataset(cfg.synth);
  write_dataset(o.out_dir, data);
  std::ofstream(fs::path(o.out_dir) / "synth.cfg", std::ios::binary) << render_config(cfg);
  out << "wrote " << data.recordings.size() << " recordings and manifest.csv to " << o.out_dir << '\n';
  return 0;
}

int cmd_train(const CommonOptions& o, const std::string& data, const std::string& models, int jobs, bool verbose,
              std::ostream& out, std::ostream& err) {
  const CliConfig cfg = resolve_config(o);
  std::vector<ModelSpec> specs;
  for (auto kind : parse_models(models)) {
    ModelSpec s = cfg.model;
    s.kind = kind;
    specs.push_back(s);
  }
  const auto recs = load_recordings(data, cfg);
  auto windows = segment_recordings(recs, cfg.window, cfg.overlap);
  const WindowSet ws = split_and_fold(std::move(windows), cfg.train.train_fraction, cfg.train.n_folds, cfg.seed);
  out << recs.size() << " recordings, " << ws.size() << " windows (" << ws.indices(SplitTag::train).size()
      << " train / " << ws.indices(SplitTag::test).size() << " test), " << cfg.train.n_folds << " folds\n";

  ExperimentOptions options;
  options.jobs = jobs;
  std::mutex log_mutex;
  if (verbose)
    options.on_epoch = [&](ModelKind kind, int fold, const EpochRecord& r) {
      std::lock_guard lock(log_mutex);
      err << to_string(kind) << " fold " << fold << " epoch " << r.epoch << " train_loss " << r.train_loss
          << " val_loss " << r.val_loss << " val_acc " << r.val_acc << '\n';
    };
  const auto runs = run_cv_experiment(specs, ws, cfg.train, options);
  write_experiment(o.out_dir, runs);
  std::ofstream(fs::path(o.out_dir) / "train.cfg", std::ios::binary) << render_config(cfg);

  std::vector<RunReport> reports;
  for (const auto& r : runs) reports.push_back(r.report);
  std::stable_sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) { return a.model < b.model; });
  print_table(out, reports);
  return 0;
}

int cmd_eval(const CommonOptions& o, const std::string& checkpoint, const std::string& data, std::ostream& out) {
  const CliConfig cfg = resolve_config(o);
  const ModelState model = read_checkpoint(checkpoint);
  const auto recs = load_recordings(data, cfg);
  const auto windows = segment_recordings(recs, cfg.window, cfg.overlap);
  std::vector<Example> examples;
  for (const auto& w : windows) examples.push_back({&w.data, index_of(w.label)});
  const Evaluation ev = evaluate(model, examples, cfg.train.batch_size);
  std::vector<int> truths;
  for (const auto& e : examples) truths.push_back(e.label);
  const ConfusionMatrix cm = confusion_matrix(ev.predictions, truths, model.spec.n_classes);
  const Metrics m = classification_metrics(cm);

  if (!o.out_dir.empty()) {
    fs::create_directories(o.out_dir);
    std::ofstream pred(fs::path(o.out_dir) / "predictions.csv", std::ios::binary);
    pred << "subject,trial,start,true,predicted\n";
    for (std::size_t i = 0; i < windows.size(); ++i)
      pred << windows[i].subject_id << ',' << windows[i].trial_id << ',' << windows[i].start << ','
           << to_string(windows[i].label) << ',' << to_string(pain_class_from_index(ev.predictions[i])) << '\n';
    write_confusion_csv(fs::path(o.out_dir) / "confusion.csv", cm);
  }
  out << to_string(model.spec.kind) << " on " << windows.size() << " windows: loss " << ev.loss << ", accuracy "
      << format_percent(m.accuracy) << ", sensitivity " << format_percent(m.sensitivity) << ", specificity "
      << format_percent(m.specificity) << '\n';
  return 0;
}

int cmd_report(const std::string& run_dir, const std::string& out_dir, std::ostream& out) {
  const auto reports = reports_from_run_dir(run_dir);
  emit_reports(reports, out_dir.empty() ? run_dir : out_dir);
  print_table(out, reports);
  return 0;
}

int cmd_gradcheck(std::size_t seeds, std::ostream& out) {
  constexpr double tolerance = 1e-5;
  bool ok = true;
  out << std::left << std::setw(24) << "check" << "max_rel_error\n";
  for (const auto& r : run_gradcheck_suite(seeds)) {
    const bool pass = r.max_rel_error < tolerance;
    ok = ok && pass;
    out << std::left << std::setw(24) << r.name << std::scientific << std::setprecision(3) << r.max_rel_error
        << (pass ? "" : "  FAIL") << '\n'
        << std::defaultfloat;
  }
  out << (ok ? "all gradients within 1e-5\n" : "gradient check FAILED\n");
  return ok ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Train and evaluate MLP / LSTM / Bi-LSTM pain classifiers on 24-channel HbO recordings", "fnirs"};
  app.require_subcommand(1);
  app.footer(config_help());

  CommonOptions common;
  auto add_common = [&](CLI::App* sub, bool out_required) {
    sub->add_option("--config", common.config_path, "key = value config file")->check(CLI::ExistingFile);
    auto* o = sub->add_option("--out", common.out_dir, "output directory");
    if (out_required) o->required();
    sub->add_option("--seed", common.seed, "root seed (default 7)");
    sub->footer(config_help());
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic labeled dataset");
  add_common(synth, true);

  std::string data, models = "all", checkpoint, run_dir;
  int jobs = 1;
  bool verbose = false;
  auto* train = app.add_subcommand("train", "run the 70/30 split + k-fold experiment");
  add_common(train, true);
  train->add_option("--data", data, "dataset directory or manifest.csv")->required();
  train->add_option("--models", models, "mlp|lstm_fwd|lstm_bwd|bilstm|all, comma-separated");
  train->add_option("--jobs", jobs, "concurrent fold trainings")->check(CLI::PositiveNumber);
  train->add_flag("--verbose", verbose, "log every epoch to stderr");

  auto* eval = app.add_subcommand("eval", "apply a checkpoint to every window of a manifest");
  add_common(eval, false);
  eval->add_option("--checkpoint", checkpoint, "model checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", data, "dataset directory or manifest.csv")->required();

  auto* report = app.add_subcommand("report", "re-emit tables and curves from a run directory");
  report->add_option("--run", run_dir, "directory holding history.csv and confusion_<model>.csv")
      ->required()
      ->check(CLI::ExistingDirectory);
  report->add_option("--out", common.out_dir, "output directory (default: the run directory)");

  std::size_t seeds = 5;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every backward pass");
  gradcheck->add_option("--seeds", seeds, "random configurations per check")->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  for (auto* sub : {synth, train, eval}) {
    if (!sub->parsed()) continue;
    common.seed_given = sub->count("--seed") > 0;
    if (!common.seed_given && std::getenv("CI")) {
      err << "error: --seed is mandatory when CI is set\n";
      return 2;
    }
  }

  try {
    if (synth->parsed()) return cmd_synth(common, out);
    if (train->parsed()) return cmd_train(common, data, models, jobs, verbose, out, err);
    if (eval->parsed()) return cmd_eval(common, checkpoint, data, out);
    if (report->parsed()) return cmd_report(run_dir, common.out_dir, out);
    if (gradcheck->parsed()) return cmd_gradcheck(seeds, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace fnirs
