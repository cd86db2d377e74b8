#include "fnirs/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "fnirs/dataio.hpp"
#include "text_util.hpp"

namespace fnirs {

namespace fs = std::filesystem;

ConfusionMatrix::ConfusionMatrix(std::size_t n_classes) : n_(n_classes), counts_(n_classes * n_classes, 0) {
  if (n_classes < 2) throw std::invalid_argument("confusion matrix needs at least 2 classes");
}

void ConfusionMatrix::add(int truth, int predicted) {
  const auto n = static_cast<int>(n_);
  if (truth < 0 || truth >= n || predicted < 0 || predicted >= n)
    throw std::out_of_range("class pair (" + std::to_string(truth) + ", " + std::to_string(predicted) +
                            ") outside 0.." + std::to_string(n - 1));
  ++counts_[static_cast<std::size_t>(truth) * n_ + static_cast<std::size_t>(predicted)];
}

long ConfusionMatrix::total() const {
  long t = 0;
  for (auto c : counts_) t += c;
  return t;
}

long ConfusionMatrix::row_sum(std::size_t truth) const {
  long s = 0;
  for (std::size_t p = 0; p < n_; ++p) s += count(truth, p);
  return s;
}

long ConfusionMatrix::col_sum(std::size_t predicted) const {
  long s = 0;
  for (std::size_t t = 0; t < n_; ++t) s += count(t, predicted);
  return s;
}

ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> truths,
                                 std::size_t n_classes) {
  if (predictions.size() != truths.size())
    throw std::invalid_argument("confusion_matrix: " + std::to_string(predictions.size()) + " predictions vs " +
                                std::to_string(truths.size()) + " truths");
  ConfusionMatrix cm(n_classes);
  for (std::size_t i = 0; i < truths.size(); ++i) cm.add(truths[i], predictions[i]);
  return cm;
}

Metrics classification_metrics(const ConfusionMatrix& cm) {
  const long total = cm.total();
  if (total <= 0) throw std::invalid_argument("classification metrics need a nonempty confusion matrix");
  long trace = 0;
  double sens_sum = 0.0, spec_sum = 0.0;
  int sens_n = 0, spec_n = 0;
  for (std::size_t c = 0; c < cm.n_classes(); ++c) {
    const long tp = cm.count(c, c);
    const long fn = cm.row_sum(c) - tp;
    const long fp = cm.col_sum(c) - tp;
    const long tn = total - tp - fn - fp;
    trace += tp;
    if (tp + fn > 0) {
      sens_sum += static_cast<double>(tp) / static_cast<double>(tp + fn);
      ++sens_n;
    }
    if (tn + fp > 0) {
      spec_sum += static_cast<double>(tn) / static_cast<double>(tn + fp);
      ++spec_n;
    }
  }
  Metrics m;
  m.accuracy = 100.0 * static_cast<double>(trace) / static_cast<double>(total);
  m.sensitivity = sens_n ? 100.0 * sens_sum / sens_n : 0.0;
  m.specificity = spec_n ? 100.0 * spec_sum / spec_n : 0.0;
  return m;
}

std::string format_percent(double percent) {
  // nearbyint follows the default round-to-nearest-even mode.
  return text::fixed(std::nearbyint(percent * 10.0) / 10.0, 1);
}

std::vector<EpochRecord> average_histories(const std::vector<std::vector<EpochRecord>>& histories) {
  std::size_t longest = 0;
  for (const auto& h : histories) longest = std::max(longest, h.size());
  std::vector<EpochRecord> out(longest);
  for (std::size_t e = 0; e < longest; ++e) {
    EpochRecord& avg = out[e];
    avg.epoch = e + 1;
    std::size_t n = 0;
    for (const auto& h : histories) {
      if (h.empty()) continue;
      const EpochRecord& r = h[std::min(e, h.size() - 1)];
      avg.train_loss += r.train_loss;
      avg.val_loss += r.val_loss;
      avg.train_acc += r.train_acc;
      avg.val_acc += r.val_acc;
      ++n;
    }
    const double inv = 1.0 / static_cast<double>(n);
    avg.train_loss *= inv;
    avg.val_loss *= inv;
    avg.train_acc *= inv;
    avg.val_acc *= inv;
  }
  return out;
}

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing file: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (!text::trim(line).empty()) lines.push_back(line);
  return lines;
}

double parse_cell(std::string_view cell, const fs::path& path, std::size_t line) {
  const auto v = text::parse_double(cell);
  if (!v) throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": non-numeric cell '" +
                                   std::string(cell) + "'");
  return *v;
}

}  // namespace

void emit_reports(std::span<const RunReport> reports, const fs::path& out_dir) {
  if (reports.empty()) throw std::invalid_argument("emit_reports: no reports");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<const RunReport*> ordered;
  for (const auto& r : reports) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const RunReport* a, const RunReport* b) { return a->model < b->model; });

  const fs::path table = out_dir / "results_table.csv";
  auto t = open_output(table);
  t << "# percent of test windows; sensitivity and specificity are macro-averaged one-vs-rest\n";
  t << "model,accuracy,sensitivity,specificity\n";
  for (const auto* r : ordered)
    t << to_string(r->model) << ',' << format_percent(r->metrics.accuracy) << ','
      << format_percent(r->metrics.sensitivity) << ',' << format_percent(r->metrics.specificity) << '\n';
  finish(t, table);

  const fs::path curves = out_dir / "curves.csv";
  auto c = open_output(curves);
  c << "model,epoch,train_loss,val_loss,train_acc,val_acc\n";
  for (const auto* r : ordered)
    for (const auto& e : r->history)
      c << to_string(r->model) << ',' << e.epoch << ',' << text::shortest(e.train_loss) << ','
        << text::shortest(e.val_loss) << ',' << text::shortest(e.train_acc) << ',' << text::shortest(e.val_acc)
        << '\n';
  finish(c, curves);

  for (const auto* r : ordered)
    write_confusion_csv(out_dir / ("confusion_" + std::string(to_string(r->model)) + ".csv"), r->confusion);
}

void write_history_csv(const fs::path& path, std::span<const HistoryRow> rows) {
  auto out = open_output(path);
  out << "spec,fold,epoch,train_loss,val_loss,train_acc,val_acc\n";
  for (const auto& row : rows) {
    const EpochRecord& e = row.record;
    out << row.model << ',' << row.fold << ',' << e.epoch << ',' << text::shortest(e.train_loss) << ','
        << text::shortest(e.val_loss) << ',' << text::shortest(e.train_acc) << ',' << text::shortest(e.val_acc)
        << '\n';
  }
  finish(out, path);
}

std::vector<HistoryRow> read_history_csv(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || text::trim(lines[0]) != "spec,fold,epoch,train_loss,val_loss,train_acc,val_acc")
    throw std::runtime_error(path.string() + ":1: unexpected history header");
  std::vector<HistoryRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = text::split(lines[i], ',');
    if (cells.size() != 7)
      throw std::runtime_error(path.string() + ":" + std::to_string(i + 1) + ": expected 7 columns");
    HistoryRow row;
    row.model = std::string(cells[0]);
    row.fold = static_cast<int>(parse_cell(cells[1], path, i + 1));
    row.record.epoch = static_cast<std::size_t>(parse_cell(cells[2], path, i + 1));
    row.record.train_loss = parse_cell(cells[3], path, i + 1);
    row.record.val_loss = parse_cell(cells[4], path, i + 1);
    row.record.train_acc = parse_cell(cells[5], path, i + 1);
    row.record.val_acc = parse_cell(cells[6], path, i + 1);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_confusion_csv(const fs::path& path, const ConfusionMatrix& cm) {
  auto out = open_output(path);
  out << "true\\pred";
  for (std::size_t p = 0; p < cm.n_classes(); ++p)
    out << ',' << (cm.n_classes() == kClasses ? std::string(to_string(pain_class_from_index(static_cast<int>(p))))
                                              : std::to_string(p));
  out << '\n';
  for (std::size_t t = 0; t < cm.n_classes(); ++t) {
    out << (cm.n_classes() == kClasses ? std::string(to_string(pain_class_from_index(static_cast<int>(t))))
                                       : std::to_string(t));
    for (std::size_t p = 0; p < cm.n_classes(); ++p) out << ',' << cm.count(t, p);
    out << '\n';
  }
  finish(out, path);
}

ConfusionMatrix read_confusion_csv(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error(path.string() + ": empty confusion file");
  const std::size_t n = text::split(lines[0], ',').size() - 1;
  if (lines.size() != n + 1) throw std::runtime_error(path.string() + ": confusion matrix is not square");
  ConfusionMatrix cm(n);
  for (std::size_t t = 0; t < n; ++t) {
    const auto cells = text::split(lines[t + 1], ',');
    if (cells.size() != n + 1)
      throw std::runtime_error(path.string() + ":" + std::to_string(t + 2) + ": expected " +
                               std::to_string(n + 1) + " columns");
    for (std::size_t p = 0; p < n; ++p) {
      const double v = parse_cell(cells[p + 1], path, t + 2);
      if (v < 0 || v != std::floor(v))
        throw std::runtime_error(path.string() + ":" + std::to_string(t + 2) + ": counts must be nonnegative integers");
      cm.count(t, p) = static_cast<long>(v);
    }
  }
  return cm;
}

std::vector<RunReport> reports_from_run_dir(const fs::path& run_dir) {
  const auto rows = read_history_csv(run_dir / "history.csv");
  std::map<ModelKind, std::map<int, std::vector<EpochRecord>>> grouped;
  for (const auto& row : rows) grouped[model_kind_from_string(row.model)][row.fold].push_back(row.record);

  std::vector<RunReport> reports;
  for (auto& [kind, folds] : grouped) {
    std::vector<std::vector<EpochRecord>> histories;
    for (auto& [fold, h] : folds) histories.push_back(std::move(h));
    RunReport r;
    r.model = kind;
    r.history = average_histories(histories);
    r.confusion = read_confusion_csv(run_dir / ("confusion_" + std::string(to_string(kind)) + ".csv"));
    r.metrics = classification_metrics(r.confusion);
    reports.push_back(std::move(r));
  }
  if (reports.empty()) throw std::runtime_error(run_dir.string() + "/history.csv holds no rows");
  return reports;
}

}  // namespace fnirs
