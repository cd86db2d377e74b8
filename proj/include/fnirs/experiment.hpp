#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "fnirs/trainer.hpp"

namespace fnirs {

struct FoldRun {
  int fold = 0;
  TrainResult result;
};

struct ModelRun {
  ModelSpec spec;
  std::vector<FoldRun> folds;
  RunReport report;
  std::size_t test_windows = 0;
};

struct ExperimentOptions {
  int jobs = 1;  // concurrent fold trainings
  /// Called from worker threads after each epoch; must be thread-safe.
  std::function<void(ModelKind, int fold, const EpochRecord&)> on_epoch;
};

/**
 * For every spec and fold k: train on the other folds, validate on fold k.
 * Per-epoch histories are averaged across folds; the fold model with the
 * highest validation accuracy (lowest fold on ties) is scored once on the
 * test windows. Folds run as independent jobs with their own random streams,
 * so results do not depend on `jobs`.
 */
std::vector<ModelRun> run_cv_experiment(const std::vector<ModelSpec>& specs, const WindowSet& ws,
                                        const TrainConfig& cfg, const ExperimentOptions& options = {});

/// history.csv, checkpoints/<model>_fold<k>.ckpt, results_table.csv, curves.csv, confusion_<model>.csv.
void write_experiment(const std::filesystem::path& out_dir, const std::vector<ModelRun>& runs);

}  // namespace fnirs
