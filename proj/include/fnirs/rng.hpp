#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace fnirs {

/// Seeded random stream with platform-independent draws.
///
/// std::mt19937_64 output is fixed by the standard; the distributions built on
/// top of it here are hand-written so that identical seeds give identical
/// datasets, splits and weights on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Independent stream keyed by a root seed and a path of identifiers.
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n).
  std::uint64_t index(std::uint64_t n);
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace fnirs
