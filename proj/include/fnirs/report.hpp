#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fnirs/model.hpp"

namespace fnirs {

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double train_acc = 0.0;  // fraction in [0, 1]
  double val_acc = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

/// Counts indexed [true class][predicted class].
class ConfusionMatrix {
 public:
  ConfusionMatrix() : ConfusionMatrix(4) {}
  explicit ConfusionMatrix(std::size_t n_classes);

  void add(int truth, int predicted);
  std::size_t n_classes() const { return n_; }
  long count(std::size_t truth, std::size_t predicted) const { return counts_[truth * n_ + predicted]; }
  long& count(std::size_t truth, std::size_t predicted) { return counts_[truth * n_ + predicted]; }
  long total() const;
  long row_sum(std::size_t truth) const;
  long col_sum(std::size_t predicted) const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t n_;
  std::vector<long> counts_;
};

ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> truths,
                                 std::size_t n_classes = 4);

/// Percentages. Sensitivity and specificity are unweighted one-vs-rest means;
/// a class without positives (negatives) is left out of the sensitivity
/// (specificity) mean.
struct Metrics {
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
};

Metrics classification_metrics(const ConfusionMatrix& cm);

struct RunReport {
  ModelKind model = ModelKind::mlp;
  Metrics metrics;
  ConfusionMatrix confusion;
  std::vector<EpochRecord> history;  // averaged across folds
  int selected_fold = -1;
};

/// Percent value rounded half-to-even at one decimal: 90.625 -> "90.6".
std::string format_percent(double percent);

/// Element-wise mean of per-fold histories; shorter histories repeat their last record.
std::vector<EpochRecord> average_histories(const std::vector<std::vector<EpochRecord>>& histories);

/// results_table.csv, curves.csv and confusion_<model>.csv in Table-I row order.
void emit_reports(std::span<const RunReport> reports, const std::filesystem::path& out_dir);

struct HistoryRow {
  std::string model;
  int fold = 0;
  EpochRecord record;
};

void write_history_csv(const std::filesystem::path& path, std::span<const HistoryRow> rows);
std::vector<HistoryRow> read_history_csv(const std::filesystem::path& path);

void write_confusion_csv(const std::filesystem::path& path, const ConfusionMatrix& cm);
ConfusionMatrix read_confusion_csv(const std::filesystem::path& path);

/// Rebuilds reports from a run directory's history.csv and confusion_<model>.csv files.
std::vector<RunReport> reports_from_run_dir(const std::filesystem::path& run_dir);

}  // namespace fnirs
