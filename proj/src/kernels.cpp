#include "zcam/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace zcam::kernels {
namespace {

void check(bool ok, const char* what) {
  if (!ok) fail(Errc::DimensionMismatch, what);
}

void shape(Matrix& out, std::size_t r, std::size_t c) {
  if (out.rows() != r || out.cols() != c) out = Matrix(r, c);
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

// i-k-j loop so the innermost loop streams contiguous rows of b and out.
void matmul_rows(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
  const std::size_t kk = a.cols(), m = b.cols();
  double* o = out.row(i).data();
  std::fill(o, o + m, 0.0);
  const double* ai = a.row(i).data();
  for (std::size_t k = 0; k < kk; ++k) {
    const double s = ai[k];
    if (s == 0.0) continue;
    const double* bk = b.row(k).data();
    for (std::size_t j = 0; j < m; ++j) o[j] += s * bk[j];
  }
}

}  // namespace

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  check(a.cols() == b.rows(), "matmul inner dimension");
  shape(out, a.rows(), b.cols());
  const auto n = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) matmul_rows(a, b, out, static_cast<std::size_t>(i));
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  check(a.rows() == b.rows(), "matmul_tn row count");
  shape(out, a.cols(), b.cols());
  const std::size_t n = a.rows(), m = b.cols();
  const auto kk = static_cast<std::ptrdiff_t>(a.cols());
  // Each thread owns whole output rows; the reduction over n stays sequential per row.
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < kk; ++k) {
    double* o = out.row(static_cast<std::size_t>(k)).data();
    std::fill(o, o + m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = a(i, static_cast<std::size_t>(k));
      if (s == 0.0) continue;
      const double* bi = b.row(i).data();
      for (std::size_t j = 0; j < m; ++j) o[j] += s * bi[j];
    }
  }
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  check(a.cols() == b.cols(), "matmul_nt inner dimension");
  shape(out, a.rows(), b.rows());
  const auto n = static_cast<std::ptrdiff_t>(a.rows());
  const std::size_t m = b.rows(), kk = a.cols();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double* ai = a.row(static_cast<std::size_t>(i)).data();
    for (std::size_t j = 0; j < m; ++j) {
      const double* bj = b.row(j).data();
      double s = 0.0;
      for (std::size_t k = 0; k < kk; ++k) s += ai[k] * bj[k];
      out(static_cast<std::size_t>(i), j) = s;
    }
  }
}

void rbf_row(const Matrix& rows, std::span<const double> x, double gamma, std::span<double> out) {
  check(rows.cols() == x.size() && out.size() == rows.rows(), "rbf_row shape");
  const auto n = static_cast<std::ptrdiff_t>(rows.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < n; ++j)
    out[j] = std::exp(-gamma * sq_dist(rows.row(static_cast<std::size_t>(j)), x));
}

void sq_dists(const Matrix& q, const Matrix& x, Matrix& out) {
  check(q.cols() == x.cols(), "sq_dists width");
  shape(out, q.rows(), x.rows());
  const auto n = static_cast<std::ptrdiff_t>(q.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto qi = q.row(static_cast<std::size_t>(i));
    for (std::size_t j = 0; j < x.rows(); ++j)
      out(static_cast<std::size_t>(i), j) = sq_dist(qi, x.row(j));
  }
}

namespace serial {

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  check(a.cols() == b.rows(), "matmul inner dimension");
  shape(out, a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  check(a.rows() == b.rows(), "matmul_tn row count");
  shape(out, a.cols(), b.cols());
  for (std::size_t k = 0; k < a.cols(); ++k)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, k) * b(i, j);
      out(k, j) = s;
    }
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  check(a.cols() == b.cols(), "matmul_nt inner dimension");
  shape(out, a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
      out(i, j) = s;
    }
}

void rbf_row(const Matrix& rows, std::span<const double> x, double gamma, std::span<double> out) {
  check(rows.cols() == x.size() && out.size() == rows.rows(), "rbf_row shape");
  for (std::size_t j = 0; j < rows.rows(); ++j) out[j] = std::exp(-gamma * sq_dist(rows.row(j), x));
}

void sq_dists(const Matrix& q, const Matrix& x, Matrix& out) {
  check(q.cols() == x.cols(), "sq_dists width");
  shape(out, q.rows(), x.rows());
  for (std::size_t i = 0; i < q.rows(); ++i)
    for (std::size_t j = 0; j < x.rows(); ++j) out(i, j) = sq_dist(q.row(i), x.row(j));
}

}  // namespace serial
}  // namespace zcam::kernels
