#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fnirs/array.hpp"

namespace fnirs {

struct AdamHyper {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment estimates mirroring a parameter list.
struct AdamState {
  AdamHyper hyper;
  std::vector<Array> m;
  std::vector<Array> v;
  std::uint64_t t = 0;

  static AdamState for_shapes(const std::vector<Shape>& shapes, AdamHyper hyper = {});
};

/// One bias-corrected Adam update; t is incremented before the correction.
void adam_step(std::span<Array* const> params, std::span<const Array> grads, AdamState& state);

}  // namespace fnirs
