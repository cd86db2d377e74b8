#include "fnirs/adam.hpp"

#include <cmath>
#include <string>

namespace fnirs {

AdamState AdamState::for_shapes(const std::vector<Shape>& shapes, AdamHyper hyper) {
  AdamState s;
  s.hyper = hyper;
  for (const auto& shape : shapes) {
    s.m.emplace_back(shape);
    s.v.emplace_back(shape);
  }
  return s;
}

void adam_step(std::span<Array* const> params, std::span<const Array> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters, " +
                     std::to_string(grads.size()) + " gradients, " + std::to_string(state.m.size()) +
                     " moment slots");
  for (std::size_t k = 0; k < params.size(); ++k) {
    require_shape(grads[k], params[k]->shape(), "adam gradient");
    require_shape(state.m[k], params[k]->shape(), "adam first moment");
  }

  const AdamHyper& h = state.hyper;
  ++state.t;
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    double* theta = params[k]->data();
    const double* g = grads[k].data();
    double* m = state.m[k].data();
    double* v = state.v[k].data();
    const std::size_t n = params[k]->size();
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
      v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      theta[i] -= h.lr * m_hat / (std::sqrt(v_hat) + h.epsilon);
    }
  }
}

}  // namespace fnirs
