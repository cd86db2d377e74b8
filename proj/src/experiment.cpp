#include "fnirs/experiment.hpp"

#include <algorithm>
#include <stdexcept>

#include "fnirs/checkpoint.hpp"

namespace fnirs {

namespace fs = std::filesystem;

std::vector<ModelRun> run_cv_experiment(const std::vector<ModelSpec>& specs, const WindowSet& ws,
                                        const TrainConfig& cfg, const ExperimentOptions& options) {
  cfg.validate();
  if (specs.empty()) throw std::invalid_argument("no model specs to train");
  if (ws.n_folds < 2 || ws.fold.size() != ws.windows.size())
    throw std::invalid_argument("window set has no fold assignment");
  const auto test_idx = ws.indices(SplitTag::test);
  if (test_idx.empty()) throw std::invalid_argument("window set has no test windows");
  for (int k = 0; k < ws.n_folds; ++k)
    if (ws.fold_indices(k).empty()) throw std::invalid_argument("fold " + std::to_string(k) + " is empty");

  const Array& probe = ws.windows.front().data;
  const InputShape input{probe.dim(0), probe.dim(1)};
  const auto n_folds = static_cast<std::size_t>(ws.n_folds);

  std::vector<ModelRun> runs(specs.size());
  for (std::size_t s = 0; s < specs.size(); ++s) {
    runs[s].spec = specs[s];
    runs[s].folds.resize(n_folds);
  }

  const std::size_t jobs = specs.size() * n_folds;
  std::vector<std::string> errors(jobs);
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, options.jobs))
  for (std::size_t job = 0; job < jobs; ++job) {
    const std::size_t s = job / n_folds;
    const int k = static_cast<int>(job % n_folds);
    try {
      const auto train_idx = ws.train_indices_excluding(k);
      const auto val_idx = ws.fold_indices(k);
      const auto train = examples_from(ws, train_idx);
      const auto val = examples_from(ws, val_idx);
      const auto kind_code = static_cast<std::uint64_t>(specs[s].kind);
      const std::uint64_t stream = Rng::derive(cfg.seed, {kind_code, static_cast<std::uint64_t>(k)}).next_u64();
      EpochCallback cb;
      if (options.on_epoch) cb = [&, kind = specs[s].kind, k](const EpochRecord& r) { options.on_epoch(kind, k, r); };
      runs[s].folds[static_cast<std::size_t>(k)] = {k, train_one_model(specs[s], input, train, val, cfg, stream, cb)};
    } catch (const std::exception& e) {
      errors[job] = std::string(to_string(specs[s].kind)) + " fold " + std::to_string(k) + ": " + e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error(e);

  const auto test = examples_from(ws, test_idx);
  std::vector<int> truths;
  for (const auto& ex : test) truths.push_back(ex.label);
  for (auto& run : runs) {
    std::vector<std::vector<EpochRecord>> histories;
    std::size_t selected = 0;
    for (std::size_t k = 0; k < run.folds.size(); ++k) {
      histories.push_back(run.folds[k].result.history);
      if (run.folds[k].result.best_val_acc > run.folds[selected].result.best_val_acc) selected = k;
    }
    const auto preds = predict(run.folds[selected].result.best, test, cfg.batch_size);
    run.report.model = run.spec.kind;
    run.report.history = average_histories(histories);
    run.report.confusion = confusion_matrix(preds, truths, run.spec.n_classes);
    run.report.metrics = classification_metrics(run.report.confusion);
    run.report.selected_fold = static_cast<int>(selected);
    run.test_windows = test.size();
  }
  return runs;
}

void write_experiment(const fs::path& out_dir, const std::vector<ModelRun>& runs) {
  fs::create_directories(out_dir / "checkpoints");
  std::vector<HistoryRow> rows;
  std::vector<RunReport> reports;
  for (const auto& run : runs) {
    const std::string name(to_string(run.spec.kind));
    for (const auto& f : run.folds) {
      for (const auto& rec : f.result.history) rows.push_back({name, f.fold, rec});
      write_checkpoint(out_dir / "checkpoints" / (name + "_fold" + std::to_string(f.fold) + ".ckpt"), f.result.best);
    }
    reports.push_back(run.report);
  }
  write_history_csv(out_dir / "history.csv", rows);
  emit_reports(reports, out_dir);
}

}  // namespace fnirs
