#pragma once

// Data-parallel inner loops shared by the models. Every kernel exists twice:
// the OpenMP version in zcam::kernels, and a plain loop in
// zcam::kernels::serial that the tests and the benchmark compare against.

#include <span>

#include "zcam/matrix.hpp"

namespace zcam::kernels {

/// out = a * b            (a: n x k, b: k x m)
void matmul(const Matrix& a, const Matrix& b, Matrix& out);
/// out = a^T * b          (a: n x k, b: n x m, out: k x m)
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out);
/// out = a * b^T          (a: n x k, b: m x k, out: n x m)
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out);

/// out[j] = exp(-gamma * |x - rows_j|^2)
void rbf_row(const Matrix& rows, std::span<const double> x, double gamma, std::span<double> out);

/// out(i, j) = |q_i - x_j|^2
void sq_dists(const Matrix& q, const Matrix& x, Matrix& out);

namespace serial {
void matmul(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out);
void rbf_row(const Matrix& rows, std::span<const double> x, double gamma, std::span<double> out);
void sq_dists(const Matrix& q, const Matrix& x, Matrix& out);
}  // namespace serial

}  // namespace zcam::kernels
