#include "fnirs/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "fnirs/rng.hpp"
#include "text_util.hpp"

namespace fnirs {

namespace fs = std::filesystem;

std::string_view to_string(PainClass c) {
  switch (c) {
    case PainClass::low_cold: return "low_cold";
    case PainClass::low_heat: return "low_heat";
    case PainClass::high_cold: return "high_cold";
    case PainClass::high_heat: return "high_heat";
  }
  throw std::invalid_argument("invalid pain class");
}

PainClass pain_class_from_string(std::string_view name) {
  for (auto c : kAllClasses)
    if (to_string(c) == name) return c;
  throw DataError("unknown class name '" + std::string(name) + "'");
}

PainClass pain_class_from_index(int code) {
  if (code < 0 || code >= static_cast<int>(kClasses))
    throw std::out_of_range("pain class code " + std::to_string(code) + " outside 0..3");
  return static_cast<PainClass>(code);
}

namespace {

std::string location(const fs::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing file: " + path.string());
  return in;
}

std::string channel_name(std::size_t c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "ch%02zu", c + 1);
  return buf;
}

}  // namespace

Recording read_recording_csv(const fs::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(location(path, 1) + ": empty recording file");
  const auto header = text::split(line, ',');
  if (header.size() != kChannels + 1)
    throw DataError(location(path, 1) + ": expected " + std::to_string(kChannels) +
                    " channel columns plus t, header has " + std::to_string(header.size()) +
                    " columns");
  if (header[0] != "t") throw DataError(location(path, 1) + ": first column must be 't'");

  std::vector<double> values;
  std::size_t rows = 0, line_no = 1;
  double prev_t = 0.0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto cells = text::split(line, ',');
    if (cells.size() != kChannels + 1)
      throw DataError(location(path, line_no) + ": expected " + std::to_string(kChannels + 1) +
                      " columns, found " + std::to_string(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = text::parse_double(cells[c]);
      if (!v || !std::isfinite(*v))
        throw DataError(location(path, line_no) + ", column " + std::to_string(c + 1) +
                        ": non-numeric cell '" + std::string(cells[c]) + "'");
      if (c == 0) {
        if (rows > 0) {
          const double dt = *v - prev_t;
          if (!(dt > 0.0))
            throw DataError(location(path, line_no) + ": time column is not increasing");
          if (std::abs(dt - 1.0 / kSampleRateHz) > 1e-3)
            throw DataError(location(path, line_no) + ": sample interval " + text::shortest(dt) +
                            " s does not match 10 Hz");
        }
        prev_t = *v;
      } else {
        values.push_back(*v);
      }
    }
    ++rows;
  }
  if (rows == 0) throw DataError(path.string() + ": recording has no samples");

  Recording rec;
  rec.channels = Array({rows, kChannels}, std::move(values));
  return rec;
}

void write_recording_csv(const fs::path& path, const Recording& rec) {
  require_shape(rec.channels, {rec.samples(), kChannels}, "recording channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << 't';
  for (std::size_t c = 0; c < kChannels; ++c) out << ',' << channel_name(c);
  out << '\n';
  for (std::size_t r = 0; r < rec.samples(); ++r) {
    out << text::fixed(static_cast<double>(r) / rec.sample_rate, 1);
    for (std::size_t c = 0; c < kChannels; ++c) out << ',' << text::shortest(rec.channels.at(r, c));
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(location(path, 1) + ": empty manifest");
  const auto header = text::split(line, ',');
  const std::vector<std::string_view> expected{"file", "subject", "trial", "class"};
  if (header != expected)
    throw DataError(location(path, 1) + ": manifest header must be 'file,subject,trial,class'");

  std::vector<ManifestEntry> entries;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto cells = text::split(line, ',');
    if (cells.size() != 4)
      throw DataError(location(path, line_no) + ": expected 4 columns, found " +
                      std::to_string(cells.size()));
    try {
      entries.push_back({std::string(cells[0]), std::string(cells[1]), std::string(cells[2]),
                         pain_class_from_string(cells[3])});
    } catch (const DataError& e) {
      throw DataError(location(path, line_no) + ", column 4: " + e.what());
    }
  }
  return entries;
}

void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "file,subject,trial,class\n";
  for (const auto& e : entries)
    out << e.file << ',' << e.subject << ',' << e.trial << ',' << to_string(e.label) << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<Recording> load_dataset(const fs::path& manifest_path) {
  const auto entries = read_manifest(manifest_path);
  const fs::path base = manifest_path.parent_path();
  std::vector<Recording> recordings(entries.size());
  // Each entry reads its own file; errors are rethrown in manifest order.
  std::vector<std::string> errors(entries.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < entries.size(); ++i) {
    try {
      const fs::path file = fs::path(entries[i].file).is_absolute() ? fs::path(entries[i].file)
                                                                    : base / entries[i].file;
      Recording rec = read_recording_csv(file);
      rec.subject_id = entries[i].subject;
      rec.trial_id = entries[i].trial;
      rec.label = entries[i].label;
      recordings[i] = std::move(rec);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& err : errors)
    if (!err.empty()) throw DataError(err);
  return recordings;
}

Recording standardize_channels(const Recording& rec) {
  Recording out = rec;
  const std::size_t n = rec.samples();
  for (std::size_t c = 0; c < kChannels; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += rec.channels.at(r, c);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = rec.channels.at(r, c) - mean;
      var += d * d;
    }
    const double sd = std::sqrt(var / static_cast<double>(n));
    const double scale = sd > 0.0 ? 1.0 / sd : 1.0;
    for (std::size_t r = 0; r < n; ++r) out.channels.at(r, c) = (rec.channels.at(r, c) - mean) * scale;
  }
  return out;
}

std::size_t window_stride(std::size_t window, double overlap) {
  if (!(overlap >= 0.0 && overlap < 1.0))
    throw std::invalid_argument("window overlap must lie in [0, 1)");
  if (window == 0) throw std::invalid_argument("window length must be positive");
  const auto stride = static_cast<std::size_t>(std::lround(static_cast<double>(window) * (1.0 - overlap)));
  return std::max<std::size_t>(stride, 1);
}

std::size_t window_count(std::size_t samples, std::size_t window, double overlap) {
  const std::size_t stride = window_stride(window, overlap);
  if (samples < window) return 0;
  return (samples - window) / stride + 1;
}

std::vector<Segment> window_segments(const Recording& rec, std::size_t window, double overlap) {
  const std::size_t stride = window_stride(window, overlap);
  const std::size_t n = rec.samples();
  if (n < window)
    throw DataError("recording " + rec.subject_id + "/" + rec.trial_id + " has " + std::to_string(n) +
                    " samples, shorter than one window of " + std::to_string(window));
  const std::size_t cols = rec.channels.dim(1);
  const std::size_t count = window_count(n, window, overlap);
  std::vector<Segment> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t start = k * stride;
    const auto first = rec.channels.values().begin() + static_cast<std::ptrdiff_t>(start * cols);
    std::vector<double> vals(first, first + static_cast<std::ptrdiff_t>(window * cols));
    out.push_back({Array({window, cols}, std::move(vals)), rec.label, start});
  }
  return out;
}

std::vector<Window> segment_recordings(const std::vector<Recording>& recordings, std::size_t window,
                                       double overlap) {
  std::vector<Window> out;
  for (const auto& rec : recordings)
    for (auto& seg : window_segments(rec, window, overlap))
      out.push_back({std::move(seg.window), seg.label, rec.subject_id, rec.trial_id, seg.start});
  return out;
}

std::vector<std::size_t> WindowSet::indices(SplitTag tag) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split.size(); ++i)
    if (split[i] == tag) out.push_back(i);
  return out;
}

std::vector<std::size_t> WindowSet::fold_indices(int k) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i)
    if (split[i] == SplitTag::train && fold[i] == k) out.push_back(i);
  return out;
}

std::vector<std::size_t> WindowSet::train_indices_excluding(int k) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i)
    if (split[i] == SplitTag::train && fold[i] != k) out.push_back(i);
  return out;
}

double WindowSet::train_share() const {
  if (windows.empty()) return 0.0;
  return static_cast<double>(indices(SplitTag::train).size()) / static_cast<double>(windows.size());
}

WindowSet split_and_fold(std::vector<Window> windows, double train_fraction, int n_folds,
                         std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0))
    throw std::invalid_argument("train fraction must lie in (0, 1]");
  if (n_folds < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");

  // Trials in order of first appearance.
  std::map<std::pair<std::string, std::string>, std::size_t> trial_of;
  std::vector<std::size_t> trial_windows;
  std::vector<std::size_t> window_trial(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto key = std::make_pair(windows[i].subject_id, windows[i].trial_id);
    auto [it, inserted] = trial_of.emplace(key, trial_windows.size());
    if (inserted) trial_windows.push_back(0);
    ++trial_windows[it->second];
    window_trial[i] = it->second;
  }

  std::vector<std::size_t> order(trial_windows.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng::derive(seed, {0x73706c6974ULL});
  rng.shuffle(order);

  // Shortest prefix of shuffled trials whose window share is closest to the target.
  const double target = train_fraction * static_cast<double>(windows.size());
  std::size_t best_prefix = 0;
  double best_gap = target;
  std::size_t cum = 0;
  for (std::size_t p = 1; p <= order.size(); ++p) {
    cum += trial_windows[order[p - 1]];
    const double gap = std::abs(static_cast<double>(cum) - target);
    if (gap < best_gap) {
      best_gap = gap;
      best_prefix = p;
    }
  }
  if (best_prefix < static_cast<std::size_t>(n_folds))
    throw std::invalid_argument("too few trials to fill " + std::to_string(n_folds) + " folds: " +
                                std::to_string(best_prefix) + " train trials of " +
                                std::to_string(order.size()));

  std::vector<int> trial_fold(order.size(), -1);
  for (std::size_t p = 0; p < best_prefix; ++p)
    trial_fold[order[p]] = static_cast<int>(p % static_cast<std::size_t>(n_folds));

  WindowSet ws;
  ws.n_folds = n_folds;
  ws.split.resize(windows.size());
  ws.fold.resize(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const int f = trial_fold[window_trial[i]];
    ws.fold[i] = f;
    ws.split[i] = f >= 0 ? SplitTag::train : SplitTag::test;
  }
  ws.windows = std::move(windows);
  return ws;
}

Array reverse_time(const Array& window) {
  if (window.rank() != 2) throw ShapeError("reverse_time expects [time x channels], got " + to_string(window.shape()));
  const std::size_t t = window.dim(0), c = window.dim(1);
  Array out(window.shape());
  for (std::size_t r = 0; r < t; ++r)
    std::copy_n(window.data() + r * c, c, out.data() + (t - 1 - r) * c);
  return out;
}

Array to_mlp_matrix(const Array& window) { return window.reshaped({window.size()}); }

}  // namespace fnirs
