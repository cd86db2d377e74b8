#include "fnirs/kernels.hpp"

#include <algorithm>
#include <cassert>
#include <cstring>
#include <vector>

namespace fnirs::kernels {

namespace {

void check_sizes(std::size_t a_need, std::size_t b_need, std::size_t c_need,
                 std::span<const double> a, std::span<const double> b, std::span<double> c) {
  assert(a.size() >= a_need && b.size() >= b_need && c.size() >= c_need);
  (void)a_need, (void)b_need, (void)c_need, (void)a, (void)b, (void)c;
}

constexpr std::size_t kTileCols = 16;

// 8 doubles; GCC/Clang vector extension, lowered to whatever SIMD width the target has.
typedef double vec8 __attribute__((vector_size(64)));

inline vec8 load8(const double* p) {
  vec8 v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

// R x 16 block of C accumulated in registers over the whole k loop.
template <std::size_t R>
inline void nn_tile(std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  vec8 acc[R][2];
  for (std::size_t r = 0; r < R; ++r) acc[r][0] = acc[r][1] = vec8{};
  for (std::size_t p = 0; p < k; ++p) {
    const vec8 b0 = load8(b + p * n), b1 = load8(b + p * n + 8);
    for (std::size_t r = 0; r < R; ++r) {
      const double s = a[r * k + p];
      acc[r][0] += s * b0;
      acc[r][1] += s * b1;
    }
  }
  for (std::size_t r = 0; r < R; ++r) {
    double* cr = c + r * n;
    const vec8 lo = load8(cr) + acc[r][0], hi = load8(cr + 8) + acc[r][1];
    std::memcpy(cr, &lo, sizeof lo);
    std::memcpy(cr + 8, &hi, sizeof hi);
  }
}

template <std::size_t R>
inline void nn_rows(std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  std::size_t j0 = 0;
  for (; j0 + kTileCols <= n; j0 += kTileCols) nn_tile<R>(n, k, a, b + j0, c + j0);
  if (j0 == n) return;
  for (std::size_t r = 0; r < R; ++r) {
    double* __restrict cr = c + r * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double* __restrict bp = b + p * n;
      const double s = a[r * k + p];
      for (std::size_t j = j0; j < n; ++j) cr[j] += s * bp[j];
    }
  }
}

inline void nn_row_block(std::size_t i0, std::size_t rows, std::size_t n, std::size_t k,
                         const double* a, const double* b, double* c) {
  a += i0 * k;
  c += i0 * n;
  switch (rows) {
    case 4: return nn_rows<4>(n, k, a, b, c);
    case 3: return nn_rows<3>(n, k, a, b, c);
    case 2: return nn_rows<2>(n, k, a, b, c);
    default: return nn_rows<1>(n, k, a, b, c);
  }
}

}  // namespace

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate) {
  check_sizes(m * k, k * n, m * n, a, b, c);
  if (!accumulate) std::fill_n(c.data(), m * n, 0.0);
  const double* ap = a.data();
  const double* bp = b.data();
  double* cp = c.data();
  const std::size_t blocks = (m + 3) / 4;
  const bool parallel = m * n * k >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (parallel)
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    const std::size_t i0 = blk * 4;
    nn_row_block(i0, std::min<std::size_t>(4, m - i0), n, k, ap, bp, cp);
  }
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate) {
  check_sizes(k * m, k * n, m * n, a, b, c);
  std::vector<double> at(m * k);
  transpose(k, m, a, at);
  gemm_nn(m, n, k, at, b, c, accumulate);
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate) {
  check_sizes(m * k, n * k, m * n, a, b, c);
  std::vector<double> bt(k * n);
  transpose(n, k, b, bt);
  gemm_nn(m, n, k, a, bt, c, accumulate);
}

void transpose(std::size_t rows, std::size_t cols, std::span<const double> in,
               std::span<double> out) {
  assert(in.size() >= rows * cols && out.size() >= rows * cols);
  constexpr std::size_t tile = 32;
  for (std::size_t r0 = 0; r0 < rows; r0 += tile)
    for (std::size_t c0 = 0; c0 < cols; c0 += tile) {
      const std::size_t r1 = std::min(rows, r0 + tile);
      const std::size_t c1 = std::min(cols, c0 + tile);
      for (std::size_t r = r0; r < r1; ++r)
        for (std::size_t col = c0; col < c1; ++col) out[col * rows + r] = in[r * cols + col];
    }
}

namespace reference {

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      c[i * n + j] = accumulate ? c[i * n + j] + s : s;
    }
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[p * m + i] * b[p * n + j];
      c[i * n + j] = accumulate ? c[i * n + j] + s : s;
    }
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[j * k + p];
      c[i * n + j] = accumulate ? c[i * n + j] + s : s;
    }
}

}  // namespace reference

}  // namespace fnirs::kernels
