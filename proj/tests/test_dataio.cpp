#include <doctest.h>

#include <map>
#include <set>

#include "fnirs/dataio.hpp"
#include "support.hpp"

using namespace fnirs;
using testing::TempDir;

namespace {

Recording make_recording(std::size_t samples, PainClass label, std::uint64_t seed = 1, std::string trial = "t01") {
  Recording r;
  r.subject_id = "sub01";
  r.trial_id = std::move(trial);
  r.channels = testing::random_array({samples, kChannels}, seed);
  r.label = label;
  return r;
}

std::string csv_rows(std::size_t rows, std::size_t channels) {
  std::string s = "t";
  for (std::size_t c = 0; c < channels; ++c) s += ",ch" + std::string(c < 9 ? "0" : "") + std::to_string(c + 1);
  s += "\n";
  for (std::size_t r = 0; r < rows; ++r) {
    s += std::to_string(r / 10) + "." + std::to_string(r % 10);
    for (std::size_t c = 0; c < channels; ++c) s += ",0.5";
    s += "\n";
  }
  return s;
}

// Windows of n_trials trials with `per_trial` windows each; data is a tiny placeholder.
std::vector<Window> fake_windows(std::size_t n_trials, std::size_t per_trial) {
  std::vector<Window> out;
  for (std::size_t t = 0; t < n_trials; ++t)
    for (std::size_t w = 0; w < per_trial; ++w)
      out.push_back({Array({1, 1}, double(t)), pain_class_from_index(int(t % 4)), "sub" + std::to_string(t / 12),
                     "t" + std::to_string(t % 12), w * 150});
  return out;
}

}  // namespace

TEST_CASE("pain class codes are stable") {
  CHECK(index_of(PainClass::low_cold) == 0);
  CHECK(index_of(PainClass::low_heat) == 1);
  CHECK(index_of(PainClass::high_cold) == 2);
  CHECK(index_of(PainClass::high_heat) == 3);
  for (PainClass c : kAllClasses) CHECK(pain_class_from_string(to_string(c)) == c);
  CHECK_THROWS_AS(pain_class_from_string("medium_cold"), DataError);
}

TEST_CASE("recording csv round trip is exact") {
  TempDir dir("csv");
  const Recording rec = make_recording(40, PainClass::high_cold, 3);
  write_recording_csv(dir / "r.csv", rec);
  const Recording back = read_recording_csv(dir / "r.csv");
  CHECK(back.channels == rec.channels);
  CHECK(back.sample_rate == 10.0);
  CHECK(testing::slurp(dir / "r.csv").rfind("t,ch01,ch02,", 0) == 0);
}

TEST_CASE("load_dataset attaches manifest labels") {
  TempDir dir("manifest");
  write_recording_csv(dir / "a.csv", make_recording(300, PainClass::low_cold, 1));
  write_recording_csv(dir / "b.csv", make_recording(300, PainClass::low_cold, 2));
  testing::spit(dir / "manifest.csv", "file,subject,trial,class\na.csv,s1,t1,low_cold\nb.csv,s1,t2,high_heat\n");
  const auto recs = load_dataset(dir / "manifest.csv");
  REQUIRE(recs.size() == 2);
  CHECK(index_of(recs[0].label) == 0);
  CHECK(index_of(recs[1].label) == 3);
  CHECK(recs[1].trial_id == "t2");

  SUBCASE("missing file names the path") {
    testing::spit(dir / "manifest.csv", "file,subject,trial,class\nabsent.csv,s1,t1,low_cold\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir / "manifest.csv"), doctest::Contains("absent.csv"), DataError);
  }
  SUBCASE("unknown class carries its location") {
    testing::spit(dir / "manifest.csv", "file,subject,trial,class\na.csv,s1,t1,warm\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir / "manifest.csv"), doctest::Contains("manifest.csv:2"), DataError);
  }
  SUBCASE("missing manifest") { CHECK_THROWS_AS(load_dataset(dir / "nope.csv"), DataError); }
}

TEST_CASE("recording csv validation") {
  TempDir dir("bad");
  SUBCASE("23 data columns") {
    testing::spit(dir / "r.csv", csv_rows(5, 23));
    CHECK_THROWS_WITH_AS(read_recording_csv(dir / "r.csv"), doctest::Contains("24"), DataError);
  }
  SUBCASE("non-numeric cell reports row and column") {
    std::string text = csv_rows(5, 24);
    text.replace(text.find("0.5", text.find("0.3,")), 3, "abc");
    testing::spit(dir / "r.csv", text);
    CHECK_THROWS_WITH_AS(read_recording_csv(dir / "r.csv"), doctest::Contains(":5, column 2"), DataError);
  }
  SUBCASE("time must advance by 0.1 s") {
    std::string text = csv_rows(5, 24);
    text.replace(text.find("\n0.2,") + 1, 3, "0.5");
    testing::spit(dir / "r.csv", text);
    CHECK_THROWS_AS(read_recording_csv(dir / "r.csv"), DataError);
  }
  SUBCASE("well-formed") {
    testing::spit(dir / "r.csv", csv_rows(5, 24));
    CHECK(read_recording_csv(dir / "r.csv").samples() == 5);
  }
}

TEST_CASE("window segmentation") {
  CHECK(window_stride(300, 0.5) == 150);
  SUBCASE("exact fit") {
    const auto segs = window_segments(make_recording(300, PainClass::low_heat));
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].start == 0);
    CHECK(segs[0].label == PainClass::low_heat);
  }
  SUBCASE("3000 samples give 19 windows") {
    const Recording rec = make_recording(3000, PainClass::high_heat);
    const auto segs = window_segments(rec);
    REQUIRE(segs.size() == 19);
    for (std::size_t i = 0; i < segs.size(); ++i) {
      CHECK(segs[i].start == 150 * i);
      CHECK(segs[i].window.shape() == Shape{300, 24});
      CHECK(segs[i].window.at(0, 5) == rec.channels.at(150 * i, 5));
      CHECK(segs[i].window.at(299, 23) == rec.channels.at(150 * i + 299, 23));
    }
    CHECK(segs.back().start == 2700);
  }
  SUBCASE("too short") { CHECK_THROWS_AS(window_segments(make_recording(299, PainClass::low_cold)), DataError); }
  SUBCASE("bad overlap") { CHECK_THROWS(window_segments(make_recording(300, PainClass::low_cold), 300, 1.0)); }
  SUBCASE("count formula over a grid") {
    for (std::size_t window : {10, 37, 300})
      for (double overlap : {0.0, 0.25, 0.5, 0.9})
        for (std::size_t T = window; T < window + 400; T += 7) {
          const auto stride = static_cast<std::size_t>(std::lround(window * (1.0 - overlap)));
          CHECK(window_count(T, window, overlap) == (T - window) / stride + 1);
        }
  }
}

TEST_CASE("split_and_fold") {
  SUBCASE("10 equal trials split 7 / 3") {
    const WindowSet ws = split_and_fold(fake_windows(10, 4), 0.7, 2, 7);
    std::set<std::string> train, test;
    for (std::size_t i = 0; i < ws.size(); ++i)
      (ws.split[i] == SplitTag::train ? train : test).insert(ws.windows[i].subject_id + ws.windows[i].trial_id);
    CHECK(train.size() == 7);
    CHECK(test.size() == 3);
  }
  SUBCASE("deterministic per seed") {
    const WindowSet a = split_and_fold(fake_windows(40, 3), 0.7, 10, 7);
    const WindowSet b = split_and_fold(fake_windows(40, 3), 0.7, 10, 7);
    const WindowSet c = split_and_fold(fake_windows(40, 3), 0.7, 10, 8);
    CHECK(a.fold == b.fold);
    CHECK(a.fold != c.fold);
  }
  SUBCASE("216 trials of 19 windows") {
    const WindowSet ws = split_and_fold(fake_windows(216, 19), 0.7, 10, 7);
    CHECK(std::abs(ws.train_share() - 0.7) < 0.05);
    std::vector<std::size_t> all;
    for (int k = 0; k < 10; ++k) {
      const auto idx = ws.fold_indices(k);
      CHECK_FALSE(idx.empty());
      all.insert(all.end(), idx.begin(), idx.end());
      const auto rest = ws.train_indices_excluding(k);
      CHECK(rest.size() + idx.size() == ws.indices(SplitTag::train).size());
    }
    std::sort(all.begin(), all.end());
    CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());  // disjoint
    CHECK(all == ws.indices(SplitTag::train));                        // union is the train side
    // No trial on both sides.
    std::map<std::string, SplitTag> side;
    for (std::size_t i = 0; i < ws.size(); ++i) {
      const auto key = ws.windows[i].subject_id + "/" + ws.windows[i].trial_id;
      auto [it, fresh] = side.emplace(key, ws.split[i]);
      if (!fresh) CHECK(it->second == ws.split[i]);
      if (ws.split[i] == SplitTag::test) CHECK(ws.fold[i] == -1);
    }
  }
  SUBCASE("too few trials") { CHECK_THROWS(split_and_fold(fake_windows(8, 2), 0.7, 10, 7)); }
}

TEST_CASE("reverse_time") {
  const Array w = Array::from_rows({{1, 2}, {3, 4}, {5, 6}});
  CHECK(reverse_time(w) == Array::from_rows({{5, 6}, {3, 4}, {1, 2}}));
  const Array big = testing::random_array({300, 24}, 4);
  CHECK(reverse_time(reverse_time(big)) == big);
  const Array flat({300, 24}, 2.5);
  CHECK(reverse_time(flat) == flat);
}

TEST_CASE("to_mlp_matrix flattens row-major") {
  CHECK(to_mlp_matrix(Array::from_rows({{1, 2}, {3, 4}})) == Array::vector({1, 2, 3, 4}));
  const Array w = testing::random_array({300, 24}, 5);
  const Array flat = to_mlp_matrix(w);
  CHECK(flat.size() == 7200);
  CHECK(flat.reshaped({300, 24}) == w);
}

TEST_CASE("standardize_channels") {
  Recording r = make_recording(500, PainClass::low_cold, 9);
  for (auto& v : r.channels.values()) v = 3.0 + 2.0 * v;
  const Recording z = standardize_channels(r);
  for (std::size_t c = 0; c < kChannels; ++c) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t t = 0; t < 500; ++t) mean += z.channels.at(t, c);
    mean /= 500;
    for (std::size_t t = 0; t < 500; ++t) sq += (z.channels.at(t, c) - mean) * (z.channels.at(t, c) - mean);
    CHECK(std::abs(mean) < 1e-12);
    CHECK(std::abs(sq / 500 - 1.0) < 1e-12);
  }
}
