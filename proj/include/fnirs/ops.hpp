#pragma once

#include <string_view>

#include "fnirs/array.hpp"

namespace fnirs {

/// Matrix product of a [m x k] and b [k x n]; throws ShapeError naming both shapes.
Array matmul(const Array& a, const Array& b);
/// a [m x k] times b [n x k] transposed.
Array matmul_nt(const Array& a, const Array& b);
/// a [k x m] transposed times b [k x n].
Array matmul_tn(const Array& a, const Array& b);

enum class Activation { sigmoid, tanh, relu, linear };

Activation activation_from_string(std::string_view name);
std::string_view to_string(Activation kind);

double activate(Activation kind, double x);
/// Derivative with respect to the pre-activation; relu'(0) is 0.
double activate_grad(Activation kind, double x);

Array activation(Activation kind, const Array& x);
Array activation_grad(Activation kind, const Array& x);

/// Row-wise softmax of a [batch x C] array, stabilized by row-max subtraction.
Array softmax(const Array& logits);

struct LossAndGrad {
  double loss = 0.0;
  Array grad;
};

/// Mean categorical cross-entropy over the batch with its gradient (softmax - onehot) / batch.
/// Probabilities are clamped at 1e-15 before the log.
LossAndGrad softmax_crossentropy(const Array& logits, const Array& onehot);

Array one_hot(std::span<const int> labels, std::size_t n_classes);

}  // namespace fnirs
