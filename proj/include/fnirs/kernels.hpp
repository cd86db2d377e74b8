#pragma once

#include <cstddef>
#include <span>

// Dense matrix-product kernels on row-major buffers.
//
// The top-level functions are OpenMP-parallel over output rows; every output
// element is produced by one thread with a fixed summation order, so results do
// not depend on the thread count. `reference::` holds the naive serial triple
// loops the parallel kernels are tested and benchmarked against.

namespace fnirs::kernels {

/// C[m x n] = A[m x k] * B[k x n]   (C += ... when accumulate)
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate = false);

/// C[m x n] = A[k x m]^T * B[k x n]
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate = false);

/// C[m x n] = A[m x k] * B[n x k]^T
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate = false);

/// out[cols x rows] = in[rows x cols]^T
void transpose(std::size_t rows, std::size_t cols, std::span<const double> in,
               std::span<double> out);

/// Work (m*n*k) below which the kernels stay on the calling thread.
inline constexpr std::size_t kParallelThreshold = std::size_t{1} << 16;

namespace reference {
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate = false);
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate = false);
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate = false);
}  // namespace reference

}  // namespace fnirs::kernels
