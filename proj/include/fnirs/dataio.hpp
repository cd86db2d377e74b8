#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fnirs/array.hpp"

namespace fnirs {

inline constexpr std::size_t kChannels = 24;
inline constexpr double kSampleRateHz = 10.0;
inline constexpr std::size_t kWindowLength = 300;
inline constexpr double kWindowOverlap = 0.5;
inline constexpr std::size_t kClasses = 4;

enum class PainClass : int { low_cold = 0, low_heat = 1, high_cold = 2, high_heat = 3 };

inline constexpr PainClass kAllClasses[] = {PainClass::low_cold, PainClass::low_heat,
                                            PainClass::high_cold, PainClass::high_heat};

std::string_view to_string(PainClass c);
PainClass pain_class_from_string(std::string_view name);
PainClass pain_class_from_index(int code);
inline int index_of(PainClass c) { return static_cast<int>(c); }

/// Malformed or missing input data; the message carries file/row/column.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One trial: raw HbO at 10 Hz, [T x 24], plus its label.
struct Recording {
  std::string subject_id;
  std::string trial_id;
  Array channels;
  double sample_rate = kSampleRateHz;
  PainClass label = PainClass::low_cold;

  std::size_t samples() const { return channels.dim(0); }
};

struct ManifestEntry {
  std::string file;
  std::string subject;
  std::string trial;
  PainClass label;
};

Recording read_recording_csv(const std::filesystem::path& path);
void write_recording_csv(const std::filesystem::path& path, const Recording& rec);

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

/// Loads every recording listed in the manifest. Recording paths are relative to
/// the manifest's directory unless absolute.
std::vector<Recording> load_dataset(const std::filesystem::path& manifest_path);

/// Per-channel z-scoring; off by default in the pipeline.
Recording standardize_channels(const Recording& rec);

struct Segment {
  Array window;  // [window x channels]
  PainClass label;
  std::size_t start;
};

std::size_t window_stride(std::size_t window, double overlap);
std::size_t window_count(std::size_t samples, std::size_t window, double overlap);

std::vector<Segment> window_segments(const Recording& rec, std::size_t window = kWindowLength,
                                     double overlap = kWindowOverlap);

struct Window {
  Array data;
  PainClass label;
  std::string subject_id;
  std::string trial_id;
  std::size_t start;
};

std::vector<Window> segment_recordings(const std::vector<Recording>& recordings,
                                       std::size_t window = kWindowLength,
                                       double overlap = kWindowOverlap);

enum class SplitTag { train, test };

/// Windows with their train/test tags and, for train windows, a fold id.
struct WindowSet {
  std::vector<Window> windows;
  std::vector<SplitTag> split;
  std::vector<int> fold;  // -1 for test windows
  int n_folds = 0;

  std::size_t size() const { return windows.size(); }
  std::vector<std::size_t> indices(SplitTag tag) const;
  std::vector<std::size_t> fold_indices(int k) const;
  /// Train windows outside fold k.
  std::vector<std::size_t> train_indices_excluding(int k) const;
  double train_share() const;
};

WindowSet split_and_fold(std::vector<Window> windows, double train_fraction, int n_folds,
                         std::uint64_t seed);

Array reverse_time(const Array& window);
Array to_mlp_matrix(const Array& window);

}  // namespace fnirs
