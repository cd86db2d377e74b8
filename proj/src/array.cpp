#include "fnirs/array.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace fnirs {

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

namespace {
void check_extents(const Shape& shape) {
  if (shape.empty()) throw ShapeError("array shape must have at least one axis");
  for (auto e : shape)
    if (e == 0) throw ShapeError("array extents must be positive, got " + to_string(shape));
}
}  // namespace

Array::Array(Shape shape, double fill) : shape_(std::move(shape)) {
  check_extents(shape_);
  values_.assign(element_count(shape_), fill);
}

Array::Array(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  check_extents(shape_);
  if (element_count(shape_) != values_.size())
    throw ShapeError("shape " + to_string(shape_) + " holds " +
                     std::to_string(element_count(shape_)) + " values, got " +
                     std::to_string(values_.size()));
}

Array Array::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n_rows = rows.size();
  const std::size_t n_cols = n_rows ? rows.begin()->size() : 0;
  std::vector<double> values;
  values.reserve(n_rows * n_cols);
  for (const auto& row : rows) {
    if (row.size() != n_cols) throw ShapeError("ragged rows in Array::from_rows");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Array({n_rows, n_cols}, std::move(values));
}

Array Array::vector(std::initializer_list<double> values) {
  return Array({values.size()}, std::vector<double>(values));
}

Array Array::reshaped(Shape shape) const {
  if (element_count(shape) != size())
    throw ShapeError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  return Array(std::move(shape), values_);
}

void Array::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

bool Array::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void require_shape(const Array& a, const Shape& expected, const char* what) {
  if (a.shape() != expected)
    throw ShapeError(std::string(what) + ": expected shape " + to_string(expected) + ", got " +
                     to_string(a.shape()));
}

}  // namespace fnirs
