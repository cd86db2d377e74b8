#include "fnirs/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fnirs/kernels.hpp"

namespace fnirs {

namespace {
void require_matrix(const Array& a, const char* what) {
  if (a.rank() != 2) throw ShapeError(std::string(what) + " must be a matrix, got " + to_string(a.shape()));
}

ShapeError product_mismatch(const Array& a, const Array& b) {
  return ShapeError("matmul shape mismatch: " + to_string(a.shape()) + " and " + to_string(b.shape()));
}
}  // namespace

Array matmul(const Array& a, const Array& b) {
  require_matrix(a, "matmul lhs");
  require_matrix(b, "matmul rhs");
  if (a.dim(1) != b.dim(0)) throw product_mismatch(a, b);
  Array c({a.dim(0), b.dim(1)});
  kernels::gemm_nn(a.dim(0), b.dim(1), a.dim(1), a.values(), b.values(), c.values());
  return c;
}

Array matmul_nt(const Array& a, const Array& b) {
  require_matrix(a, "matmul lhs");
  require_matrix(b, "matmul rhs");
  if (a.dim(1) != b.dim(1)) throw product_mismatch(a, b);
  Array c({a.dim(0), b.dim(0)});
  kernels::gemm_nt(a.dim(0), b.dim(0), a.dim(1), a.values(), b.values(), c.values());
  return c;
}

Array matmul_tn(const Array& a, const Array& b) {
  require_matrix(a, "matmul lhs");
  require_matrix(b, "matmul rhs");
  if (a.dim(0) != b.dim(0)) throw product_mismatch(a, b);
  Array c({a.dim(1), b.dim(1)});
  kernels::gemm_tn(a.dim(1), b.dim(1), a.dim(0), a.values(), b.values(), c.values());
  return c;
}

Activation activation_from_string(std::string_view name) {
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  if (name == "linear") return Activation::linear;
  throw std::invalid_argument("unknown activation kind '" + std::string(name) + "'");
}

std::string_view to_string(Activation kind) {
  switch (kind) {
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
    case Activation::linear: return "linear";
  }
  throw std::invalid_argument("unknown activation kind");
}

double activate(Activation kind, double x) {
  switch (kind) {
    case Activation::sigmoid:
      // Split on sign so exp never overflows.
      if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
      else {
        const double e = std::exp(x);
        return e / (1.0 + e);
      }
    case Activation::tanh: return std::tanh(x);
    case Activation::relu: return x <= 0.0 ? 0.0 : x;  // NaN passes through
    case Activation::linear: return x;
  }
  throw std::invalid_argument("unknown activation kind");
}

double activate_grad(Activation kind, double x) {
  switch (kind) {
    case Activation::sigmoid: {
      const double s = activate(Activation::sigmoid, x);
      return s * (1.0 - s);
    }
    case Activation::tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::linear: return 1.0;
  }
  throw std::invalid_argument("unknown activation kind");
}

Array activation(Activation kind, const Array& x) {
  Array y = x;
  for (auto& v : y.values()) v = activate(kind, v);
  return y;
}

Array activation_grad(Activation kind, const Array& x) {
  Array y = x;
  for (auto& v : y.values()) v = activate_grad(kind, v);
  return y;
}

Array softmax(const Array& logits) {
  require_matrix(logits, "softmax input");
  Array p = logits;
  const std::size_t rows = p.dim(0), cols = p.dim(1);
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = p.data() + r * cols;
    const double mx = *std::max_element(row, row + cols);
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      row[c] = std::exp(row[c] - mx);
      sum += row[c];
    }
    for (std::size_t c = 0; c < cols; ++c) row[c] /= sum;
  }
  return p;
}

namespace {
const double kMaxSampleLoss = -std::log(1e-15);  // probability floor of 1e-15
}  // namespace

LossAndGrad softmax_crossentropy(const Array& logits, const Array& onehot) {
  require_matrix(logits, "logits");
  if (logits.shape() != onehot.shape())
    throw ShapeError("logits " + to_string(logits.shape()) + " vs one-hot " + to_string(onehot.shape()));
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  if (classes < 2) throw ShapeError("softmax_crossentropy needs at least 2 classes");

  LossAndGrad out;
  out.grad = softmax(logits);
  double total = 0.0;
  for (std::size_t r = 0; r < batch; ++r) {
    std::size_t ones = 0, hot = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      const double t = onehot.at(r, c);
      if (t == 1.0) {
        ++ones;
        hot = c;
      } else if (t != 0.0) {
        ones = 2;
        break;
      }
    }
    if (ones != 1) throw std::invalid_argument("one-hot row " + std::to_string(r) + " is not a single 1");
    // -log p_hot as log1p of the other classes' odds, and p_hot - 1 as minus
    // their probability mass: both stay accurate when p_hot is close to 1.
    const double* z = logits.data() + r * classes;
    double odds = 0.0, others = 0.0;
    for (std::size_t c = 0; c < classes; ++c)
      if (c != hot) {
        odds += std::exp(z[c] - z[hot]);
        others += out.grad.at(r, c);
      }
    total += std::min(std::log1p(odds), kMaxSampleLoss);
    out.grad.at(r, hot) = -others;
  }
  const double inv = 1.0 / static_cast<double>(batch);
  for (auto& g : out.grad.values()) g *= inv;
  out.loss = total * inv;
  return out;
}

Array one_hot(std::span<const int> labels, std::size_t n_classes) {
  Array y({labels.size(), n_classes});
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= n_classes)
      throw std::out_of_range("label " + std::to_string(labels[r]) + " outside 0.." +
                              std::to_string(n_classes - 1));
    y.at(r, static_cast<std::size_t>(labels[r])) = 1.0;
  }
  return y;
}

}  // namespace fnirs
