#include <doctest.h>

#include <cmath>
#include <map>

#include "fnirs/synthgen.hpp"
#include "support.hpp"

using namespace fnirs;

namespace {

// Canonical double gamma, written out independently of the generator.
double hrf(double t) {
  if (t <= 0.0) return 0.0;
  return std::pow(t, 5.0) * std::exp(-t) / std::tgamma(6.0) - std::pow(t, 15.0) * std::exp(-t) / std::tgamma(16.0) / 6.0;
}

// Integral of hrf over [a, b] by composite Simpson.
double integrate(double a, double b) {
  a = std::max(a, 0.0);
  if (b <= a) return 0.0;
  const int n = 2 * static_cast<int>(std::ceil((b - a) / 0.01));
  const double h = (b - a) / n;
  double s = hrf(a) + hrf(b);
  for (int i = 1; i < n; ++i) s += hrf(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Response at time tau after onset of a boxcar lasting `width` seconds.
double boxcar(double tau, double width) { return integrate(tau - width, tau); }

SynthConfig quiet_config() {
  SynthConfig cfg;
  cfg.noise = {0.0, 0.0, 0.0, 0.0, 0.0};
  cfg.n_subjects = 2;
  return cfg;
}

}  // namespace

TEST_CASE("protocol timeline rests") {
  const SynthConfig cfg;
  for (std::uint64_t seed : {1, 7, 99}) {
    Rng rng(seed);
    const ProtocolTimeline tl = build_timeline(cfg, rng);
    REQUIRE(tl.events.size() == 12);
    CHECK(tl.events[0].onset == 60.0);
    for (std::size_t i = 0; i + 1 < tl.events.size(); ++i) {
      const double gap = tl.events[i + 1].onset - tl.events[i].end();
      CHECK(gap == (i == 5 ? 120.0 : 60.0));
    }
    for (std::size_t i = 0; i < 12; ++i) {
      CHECK(tl.events[i].intensity == (i < 6 ? Intensity::low : Intensity::high));
      CHECK(tl.events[i].duration == 300.0);
      // three consecutive trials per modality, then the other modality
      CHECK(tl.events[i].stimulus == tl.events[i - i % 3].stimulus);
    }
    CHECK(tl.events[0].stimulus != tl.events[3].stimulus);
    CHECK(tl.events[6].stimulus != tl.events[9].stimulus);
    CHECK(tl.total_duration == tl.events.back().end());
  }
  Rng a(5), b(5);
  const auto ta = build_timeline(cfg, a), tb = build_timeline(cfg, b);
  for (std::size_t i = 0; i < 12; ++i) CHECK(ta.events[i].stimulus == tb.events[i].stimulus);
}

TEST_CASE("haemodynamic response peaks near 5 s") {
  double best_t = 0.0, best = 0.0;
  for (double t = 0.0; t < 30.0; t += 0.01)
    if (haemodynamic_response(t) > best) best = haemodynamic_response(t), best_t = t;
  CHECK(best_t == doctest::Approx(5.0).epsilon(0.02));
  for (double t : {0.5, 3.0, 6.0, 12.0, 20.0}) CHECK(haemodynamic_response(t) == doctest::Approx(hrf(t)).epsilon(1e-12));
}

TEST_CASE("noise-free signal matches a direct convolution oracle") {
  const SynthConfig cfg = quiet_config();
  const SyntheticDataset data = generate_dataset(cfg);
  REQUIRE(data.recordings.size() == 2 * 12);

  // Peak of the normalized single-event response.
  double norm = 0.0;
  for (double tau = 0.0; tau < 40.0; tau += 0.1) norm = std::max(norm, boxcar(tau, cfg.trial_seconds));

  for (std::size_t idx : {std::size_t{0}, std::size_t{4}, std::size_t{7}, std::size_t{13}}) {
    const Recording& rec = data.recordings[idx];
    const ProtocolTimeline& tl = data.timelines[idx / 12];
    const StimulusEvent& own = tl.events[idx % 12];
    const double amp = cfg.response_amplitudes[index_of(rec.label)];

    // Identical channels 13..24 (no heat gain there), heat gain on 1..12.
    for (std::size_t t = 0; t < rec.samples(); t += 37) {
      for (std::size_t c = 13; c < kChannels; ++c) CHECK(rec.channels.at(t, c) == rec.channels.at(t, 12));
      const double spatial = own.stimulus == Stimulus::heat ? cfg.heat_gain : 1.0;
      CHECK(rec.channels.at(t, 0) == doctest::Approx(rec.channels.at(t, 12) * spatial).epsilon(0.05));
    }

    double peak = 0.0;
    for (std::size_t t = 0; t < rec.samples(); ++t) peak = std::max(peak, rec.channels.at(t, 23));
    CHECK(std::abs(peak - amp) <= 0.01 * amp);

    for (std::size_t t = 0; t < rec.samples(); t += 50) {
      const double now = own.onset + static_cast<double>(t) / 10.0;
      double expect = 0.0;
      for (const auto& ev : tl.events)
        expect += cfg.response_amplitudes[index_of(class_of(ev.intensity, ev.stimulus))] *
                  boxcar(now - ev.onset, ev.duration) / norm;
      CHECK(std::abs(rec.channels.at(t, 23) - expect) <= 0.02);
    }
  }
}

TEST_CASE("noise-free high pain exceeds matched low pain") {
  const SyntheticDataset data = generate_dataset(quiet_config());
  std::map<PainClass, std::vector<double>> sums;
  std::map<PainClass, int> counts;
  for (const auto& rec : data.recordings) {
    auto& s = sums[rec.label];
    s.resize(kChannels);
    for (std::size_t t = 0; t < rec.samples(); ++t)
      for (std::size_t c = 0; c < kChannels; ++c) s[c] += rec.channels.at(t, c);
    ++counts[rec.label];
  }
  for (std::size_t c = 0; c < kChannels; ++c) {
    CHECK(sums[PainClass::high_cold][c] / counts[PainClass::high_cold] >
          sums[PainClass::low_cold][c] / counts[PainClass::low_cold]);
    CHECK(sums[PainClass::high_heat][c] / counts[PainClass::high_heat] >
          sums[PainClass::low_heat][c] / counts[PainClass::low_heat]);
  }
}

TEST_CASE("default dataset: counts, determinism, split") {
  const SynthConfig cfg;
  const SyntheticDataset a = generate_dataset(cfg);
  REQUIRE(a.recordings.size() == 216);
  REQUIRE(a.manifest.size() == 216);
  std::map<PainClass, int> per_class;
  for (const auto& m : a.manifest) ++per_class[m.label];
  for (PainClass c : kAllClasses) CHECK(per_class[c] == 54);
  for (const auto& r : a.recordings) {
    CHECK(r.samples() == 3000);
    CHECK(r.channels.all_finite());
  }
  CHECK(a.manifest[0].file == "sub01_t01.csv");

  const SyntheticDataset b = generate_dataset(cfg);
  bool same = true;
  for (std::size_t i = 0; i < 216; ++i) same = same && a.recordings[i].channels == b.recordings[i].channels;
  CHECK(same);

  SynthConfig other = cfg;
  other.seed = 8;
  CHECK_FALSE(generate_dataset(other).recordings[0].channels == a.recordings[0].channels);

  const WindowSet ws = split_and_fold(segment_recordings(a.recordings), 0.7, 10, 7);
  CHECK(ws.size() == 216 * 19);
  CHECK(std::abs(ws.train_share() - 0.7) < 0.05);
  for (int k = 0; k < 10; ++k) CHECK_FALSE(ws.fold_indices(k).empty());
}

TEST_CASE("written datasets are byte-identical across runs") {
  SynthConfig cfg;
  cfg.n_subjects = 2;
  testing::TempDir d1("synth1"), d2("synth2");
  write_dataset(d1.path(), generate_dataset(cfg));
  write_dataset(d2.path(), generate_dataset(cfg));
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(d1.path())) {
    const auto name = entry.path().filename();
    CHECK(testing::slurp(entry.path()) == testing::slurp(d2.path() / name));
    ++files;
  }
  CHECK(files == 24 + 1);
  const auto back = load_dataset(d1 / "manifest.csv");
  CHECK(back.size() == 24);
}

TEST_CASE("synth config validation") {
  SynthConfig cfg;
  cfg.response_amplitudes = {0.5, 0.5, 0.4, 1.0};
  CHECK_THROWS(cfg.validate());
  cfg = SynthConfig{};
  cfg.noise.pink_sd = -1.0;
  CHECK_THROWS(cfg.validate());
  cfg = SynthConfig{};
  cfg.trial_seconds = 29.0;
  CHECK_THROWS(generate_dataset(cfg));
}
