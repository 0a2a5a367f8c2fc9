// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gemo/numerics/matrix.hpp"

namespace gemo {

// Matrix products come in two builds. `serial` is the reference loop nest kept
// for tests and benchmarks; `parallel` splits output rows across OpenMP
// threads. Both accumulate every output entry in the same order, so results
// are bit-identical regardless of thread count.

namespace serial {
Matrix matmul(const Matrix& a, const Matrix& b);     // a * b
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // a * b^T
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // a^T * b
}  // namespace serial

namespace parallel {
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);

/// Multiply-add count below which the parallel kernels stay on one thread.
inline constexpr std::size_t kMinParallelWork = 1u << 16;
}  // namespace parallel

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double factor);

/// Row-wise softmax with per-row max subtraction.
Matrix row_softmax(const Matrix& m);
Matrix row_log_softmax(const Matrix& m);

/// 1xD column means of a TxD sequence.
Matrix mean_rows(const Matrix& seq);

/// First row as a 1xD matrix.
Matrix first_row(const Matrix& seq);

/// Stacks 1xD rows (or any matrices with equal column count) vertically.
Matrix stack_rows(std::span<const Matrix> parts);

double sum(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace gemo
