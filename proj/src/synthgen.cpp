#include "fnirs/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fnirs {

PainClass class_of(Intensity intensity, Stimulus stimulus) {
  if (intensity == Intensity::low)
    return stimulus == Stimulus::cold ? PainClass::low_cold : PainClass::low_heat;
  return stimulus == Stimulus::cold ? PainClass::high_cold : PainClass::high_heat;
}

namespace {

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) throw std::invalid_argument("invalid synth config '" + field + "': " + why);
}

std::size_t samples_for(double seconds) {
  return static_cast<std::size_t>(std::lround(seconds * kSampleRateHz));
}

std::string two_digits(std::size_t v) {
  std::string s = std::to_string(v);
  return s.size() < 2 ? "0" + s : s;
}

// Paul Kellet's refined pinking filter; white noise in, ~1/f power out.
class PinkFilter {
 public:
  double operator()(double white) {
    b_[0] = 0.99886 * b_[0] + white * 0.0555179;
    b_[1] = 0.99332 * b_[1] + white * 0.0750759;
    b_[2] = 0.96900 * b_[2] + white * 0.1538520;
    b_[3] = 0.86650 * b_[3] + white * 0.3104856;
    b_[4] = 0.55000 * b_[4] + white * 0.5329522;
    b_[5] = -0.7616 * b_[5] - white * 0.0168980;
    const double out = b_[0] + b_[1] + b_[2] + b_[3] + b_[4] + b_[5] + b_[6] + white * 0.5362;
    b_[6] = white * 0.115926;
    return out;
  }

 private:
  std::array<double, 7> b_{};
};

constexpr std::size_t kPinkWarmup = 2000;
constexpr double kKernelSeconds = 32.0;

// Discrete step response of the haemodynamic kernel: K[j] = sum_{i<=j} h(i dt) dt.
std::vector<double> cumulative_kernel() {
  const std::size_t len = samples_for(kKernelSeconds) + 1;
  std::vector<double> k(len);
  double acc = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    acc += haemodynamic_response(static_cast<double>(i) / kSampleRateHz) / kSampleRateHz;
    k[i] = acc;
  }
  return k;
}

double step_at(const std::vector<double>& k, std::ptrdiff_t j) {
  if (j < 0) return 0.0;
  if (static_cast<std::size_t>(j) >= k.size()) return k.back();
  return k[static_cast<std::size_t>(j)];
}

// Boxcar [0, width) convolved with the kernel, evaluated at sample j.
double boxcar_response(const std::vector<double>& k, std::ptrdiff_t j, std::ptrdiff_t width) {
  return step_at(k, j) - step_at(k, j - width);
}

double boxcar_peak(const std::vector<double>& k, std::ptrdiff_t width) {
  double peak = 0.0;
  const auto span = width + static_cast<std::ptrdiff_t>(k.size());
  for (std::ptrdiff_t j = 0; j < span; ++j) peak = std::max(peak, boxcar_response(k, j, width));
  return peak;
}

}  // namespace

void SynthConfig::validate() const {
  require(n_subjects >= 1, "n_subjects", "must be at least 1");
  require(trials_per_class >= 1, "trials_per_class", "must be at least 1");
  require(std::isfinite(trial_seconds) && samples_for(trial_seconds) >= kWindowLength,
          "trial_seconds", "must give at least " + std::to_string(kWindowLength) + " samples at 10 Hz");
  for (std::size_t c = 0; c < kClasses; ++c)
    require(std::isfinite(response_amplitudes[c]) && response_amplitudes[c] >= 0.0,
            "response_amplitudes", "must be finite and nonnegative");
  require(response_amplitudes[index_of(PainClass::high_cold)] >
              response_amplitudes[index_of(PainClass::low_cold)],
          "response_amplitudes", "high_cold must exceed low_cold");
  require(response_amplitudes[index_of(PainClass::high_heat)] >
              response_amplitudes[index_of(PainClass::low_heat)],
          "response_amplitudes", "high_heat must exceed low_heat");
  require(std::isfinite(heat_gain) && heat_gain > 0.0, "heat_gain", "must be positive");
  const std::pair<const char*, double> noises[] = {{"pink_sd", noise.pink_sd},
                                                   {"mayer_amp", noise.mayer_amp},
                                                   {"resp_amp", noise.resp_amp},
                                                   {"cardiac_amp", noise.cardiac_amp},
                                                   {"drift_slope", noise.drift_slope}};
  for (const auto& [name, v] : noises) require(std::isfinite(v) && v >= 0.0, name, "must be >= 0");
  for (double g : channel_gains) require(std::isfinite(g), "channel_gains", "must be finite");
}

double haemodynamic_response(double t) {
  if (t <= 0.0) return 0.0;
  constexpr double peak_shape = 6.0, undershoot_shape = 16.0, ratio = 1.0 / 6.0;
  const auto gamma_pdf = [t](double shape) {
    return std::exp((shape - 1.0) * std::log(t) - t - std::lgamma(shape));
  };
  return gamma_pdf(peak_shape) - ratio * gamma_pdf(undershoot_shape);
}

ProtocolTimeline build_timeline(const SynthConfig& config, Rng& rng) {
  config.validate();
  ProtocolTimeline tl;
  double cursor = kInitialRestSeconds;
  for (Intensity intensity : {Intensity::low, Intensity::high}) {
    if (intensity == Intensity::high) cursor += kInterTestRestSeconds - kInterTrialRestSeconds;
    const Stimulus first = rng.bernoulli(0.5) ? Stimulus::heat : Stimulus::cold;
    const Stimulus second = first == Stimulus::cold ? Stimulus::heat : Stimulus::cold;
    for (Stimulus stimulus : {first, second}) {
      for (std::size_t k = 0; k < config.trials_per_class; ++k) {
        tl.events.push_back({cursor, config.trial_seconds, stimulus, intensity});
        cursor += config.trial_seconds + kInterTrialRestSeconds;
      }
    }
  }
  tl.total_duration = tl.events.back().end();
  return tl;
}

SyntheticDataset generate_dataset(const SynthConfig& config) {
  config.validate();
  const std::size_t per_subject = 4 * config.trials_per_class;
  const std::size_t n_samples = samples_for(config.trial_seconds);
  const auto kernel = cumulative_kernel();
  const auto width = static_cast<std::ptrdiff_t>(n_samples);
  const double peak = boxcar_peak(kernel, width);

  SyntheticDataset out;
  out.recordings.resize(config.n_subjects * per_subject);
  out.manifest.resize(out.recordings.size());
  out.timelines.resize(config.n_subjects);

#pragma omp parallel for schedule(dynamic)
  for (std::size_t s = 0; s < config.n_subjects; ++s) {
    Rng timeline_rng = Rng::derive(config.seed, {s, 0x74696d65ULL});
    const ProtocolTimeline tl = build_timeline(config, timeline_rng);
    out.timelines[s] = tl;
    const std::string subject = "sub" + two_digits(s + 1);

    for (std::size_t e = 0; e < tl.events.size(); ++e) {
      const StimulusEvent& trial = tl.events[e];
      const auto trial_start = static_cast<std::ptrdiff_t>(samples_for(trial.onset));
      Array x({n_samples, kChannels});

      // Clean signal: every event's normalized boxcar response, so tails of
      // earlier trials carry into later recordings.
      for (const StimulusEvent& ev : tl.events) {
        const PainClass cls = class_of(ev.intensity, ev.stimulus);
        const double amp = config.response_amplitudes[static_cast<std::size_t>(index_of(cls))] / peak;
        const auto ev_start = static_cast<std::ptrdiff_t>(samples_for(ev.onset));
        const auto ev_width = static_cast<std::ptrdiff_t>(samples_for(ev.duration));
        for (std::size_t n = 0; n < n_samples; ++n) {
          const auto j = trial_start + static_cast<std::ptrdiff_t>(n) - ev_start;
          const double r = boxcar_response(kernel, j, ev_width);
          if (r == 0.0) continue;
          for (std::size_t c = 0; c < kChannels; ++c) {
            const double spatial = (ev.stimulus == Stimulus::heat && c < kChannels / 2) ? config.heat_gain : 1.0;
            x.at(n, c) += amp * r * spatial * config.channel_gains[c];
          }
        }
      }

      Rng noise_rng = Rng::derive(config.seed, {s, e, 0x6e6f6973ULL});
      const NoiseConfig& nz = config.noise;
      std::vector<double> pink(n_samples);
      for (std::size_t c = 0; c < kChannels; ++c) {
        PinkFilter filter;
        for (std::size_t w = 0; w < kPinkWarmup; ++w) filter(noise_rng.normal());
        double mean = 0.0;
        for (auto& p : pink) {
          p = filter(noise_rng.normal());
          mean += p;
        }
        mean /= static_cast<double>(n_samples);
        double var = 0.0;
        for (auto& p : pink) {
          p -= mean;
          var += p * p;
        }
        const double scale = var > 0.0 ? nz.pink_sd / std::sqrt(var / static_cast<double>(n_samples)) : 0.0;
        const double two_pi = 2.0 * std::numbers::pi;
        const double ph_mayer = noise_rng.uniform(0.0, two_pi);
        const double ph_resp = noise_rng.uniform(0.0, two_pi);
        const double ph_card = noise_rng.uniform(0.0, two_pi);
        const double slope = noise_rng.uniform(-nz.drift_slope, nz.drift_slope);
        for (std::size_t n = 0; n < n_samples; ++n) {
          const double t = static_cast<double>(n) / kSampleRateHz;
          x.at(n, c) += pink[n] * scale + nz.mayer_amp * std::sin(two_pi * 0.1 * t + ph_mayer) +
                        nz.resp_amp * std::sin(two_pi * 0.3 * t + ph_resp) +
                        nz.cardiac_amp * std::sin(two_pi * 1.2 * t + ph_card) + slope * t;
        }
      }

      const std::size_t idx = s * per_subject + e;
      Recording& rec = out.recordings[idx];
      rec.subject_id = subject;
      rec.trial_id = "t" + two_digits(e + 1);
      rec.channels = std::move(x);
      rec.label = class_of(trial.intensity, trial.stimulus);
      out.manifest[idx] = {subject + "_" + rec.trial_id + ".csv", rec.subject_id, rec.trial_id, rec.label};
    }
  }
  return out;
}

void write_dataset(const std::filesystem::path& dir, const SyntheticDataset& data) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < data.recordings.size(); ++i)
    write_recording_csv(dir / data.manifest[i].file, data.recordings[i]);
  write_manifest(dir / "manifest.csv", data.manifest);
}

}  // namespace fnirs
