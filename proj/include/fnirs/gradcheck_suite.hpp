#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fnirs {

struct GradcheckResult {
  std::string name;
  double max_rel_error = 0.0;  // worst over seeds and over every checked gradient
  std::size_t seeds = 0;
};

/// Finite-difference checks of every backward pass on tiny random configurations:
/// dense, single LSTM step, 4-step stacked LSTM, bidirectional stack, training-mode
/// dropout, softmax cross-entropy, and each full model kind.
std::vector<GradcheckResult> run_gradcheck_suite(std::size_t n_seeds = 5, std::uint64_t base_seed = 1);

}  // namespace fnirs
