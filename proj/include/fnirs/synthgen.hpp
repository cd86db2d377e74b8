#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "fnirs/dataio.hpp"
#include "fnirs/rng.hpp"

namespace fnirs {

enum class Stimulus { cold, heat };
enum class Intensity { low, high };

PainClass class_of(Intensity intensity, Stimulus stimulus);

struct StimulusEvent {
  double onset = 0.0;     // seconds from session start
  double duration = 0.0;  // seconds
  Stimulus stimulus = Stimulus::cold;
  Intensity intensity = Intensity::low;

  double end() const { return onset + duration; }
};

/// One subject's session: threshold (low) test, a 2-min rest, tolerance (high) test.
struct ProtocolTimeline {
  std::vector<StimulusEvent> events;
  double total_duration = 0.0;
};

inline constexpr double kInitialRestSeconds = 60.0;
inline constexpr double kInterTrialRestSeconds = 60.0;
inline constexpr double kInterTestRestSeconds = 120.0;

struct NoiseConfig {
  double pink_sd = 0.15;
  double mayer_amp = 0.08;    // 0.1 Hz
  double resp_amp = 0.05;     // 0.3 Hz
  double cardiac_amp = 0.03;  // 1.2 Hz
  double drift_slope = 5e-4;  // concentration units per second, per-channel slope drawn in +/- this
};

struct SynthConfig {
  std::size_t n_subjects = 18;
  std::size_t trials_per_class = 3;
  double trial_seconds = 300.0;
  /// Peak response per PainClass code.
  std::array<double, kClasses> response_amplitudes{0.5, 0.5, 1.0, 1.0};
  /// Gain on channels 1-12 for heat stimuli.
  double heat_gain = 1.3;
  NoiseConfig noise;
  std::array<double, kChannels> channel_gains = [] {
    std::array<double, kChannels> g{};
    g.fill(1.0);
    return g;
  }();
  std::uint64_t seed = 7;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

ProtocolTimeline build_timeline(const SynthConfig& config, Rng& rng);

/// Canonical double-gamma haemodynamic response (shapes 6 and 16, unit scale, ratio 1/6).
double haemodynamic_response(double t_seconds);

struct SyntheticDataset {
  std::vector<Recording> recordings;
  std::vector<ManifestEntry> manifest;
  std::vector<ProtocolTimeline> timelines;  // one per subject
};

SyntheticDataset generate_dataset(const SynthConfig& config);

/// Writes each recording CSV plus manifest.csv into dir.
void write_dataset(const std::filesystem::path& dir, const SyntheticDataset& data);

}  // namespace fnirs
