#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fnirs {

using Shape = std::vector<std::size_t>;

/// Raised whenever two arrays (or an array and a parameter block) disagree on extents.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string to_string(const Shape& shape);
std::size_t element_count(const Shape& shape);

/**
 * Dense row-major array of doubles.
 *
 * Carries every signal, activation, weight and gradient in the library.
 * The only invariant is product(shape) == size(); extents must be positive.
 */
class Array {
 public:
  Array() = default;
  explicit Array(Shape shape, double fill = 0.0);
  Array(Shape shape, std::vector<double> values);

  static Array from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Array vector(std::initializer_list<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * shape_[1] + c]; }
  double& at(std::size_t i, std::size_t j, std::size_t k) {
    return values_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return values_[(i * shape_[1] + j) * shape_[2] + k];
  }

  /// Same values under a new shape with equal element count.
  Array reshaped(Shape shape) const;
  void fill(double value);
  bool all_finite() const;

  bool operator==(const Array& other) const = default;

 private:
  Shape shape_;
  std::vector<double> values_;
};

void require_shape(const Array& a, const Shape& expected, const char* what);

}  // namespace fnirs
