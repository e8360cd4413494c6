#include "zcam/pca.hpp"

#include <algorithm>
#include <cmath>

#include "zcam/error.hpp"
#include "zcam/kernels.hpp"
#include "zcam/linalg.hpp"
#include "zcam/rng.hpp"

namespace zcam::decomp {

PcaModel fit_pca(const Matrix& x, std::size_t k, const PcaParams& params) {
  const std::size_t n = x.rows(), d = x.cols();
  if (n == 0 || d == 0) fail(Errc::EmptyData, "no rows to decompose");
  if (k == 0 || k > d) fail(Errc::KTooLarge, "k must lie in [1, " + std::to_string(d) + "]");

  PcaModel m;
  m.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) m.mean[j] += (x(i, j) - m.mean[j]) / static_cast<double>(i + 1);
  Matrix xc = x;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) xc(i, j) -= m.mean[j];
  Matrix cov;
  kernels::matmul_tn(xc, xc, cov);
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) cov(i, j) /= denom;

  const std::size_t p = std::min(d, k + 8);
  Matrix q(d, p);
  Rng rng(0x9ca);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < p; ++j) q(i, j) = rng.normal();
  linalg::orthonormalize_columns(q);

  double scale = 0.0;
  for (std::size_t i = 0; i < d; ++i) scale = std::max(scale, std::abs(cov(i, i)));
  scale = std::max(scale, 1e-300);

  std::vector<double> ritz;
  Matrix cq;
  for (std::size_t it = 1; it <= params.max_iter; ++it) {
    m.iterations = it;
    kernels::matmul(cov, q, cq);
    q = cq;
    linalg::orthonormalize_columns(q);
    // Rayleigh-Ritz on the current subspace.
    kernels::matmul(cov, q, cq);
    Matrix t;
    kernels::matmul_tn(q, cq, t);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i + 1; j < p; ++j) t(i, j) = t(j, i) = 0.5 * (t(i, j) + t(j, i));
    auto eig = linalg::jacobi_eigen(t);
    Matrix rotated;
    kernels::matmul(q, eig.vectors, rotated);
    q = std::move(rotated);
    ritz = eig.values;
    if (p == d) break;  // full basis: Rayleigh-Ritz is already exact

    kernels::matmul(cov, q, cq);
    double worst = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double r = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double e = cq(i, j) - ritz[j] * q(i, j);
        r += e * e;
      }
      worst = std::max(worst, std::sqrt(r));
    }
    if (worst <= params.tol * scale) break;
  }

  m.components = Matrix(k, d);
  for (std::size_t j = 0; j < k; ++j) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < d; ++i)
      if (std::abs(q(i, j)) > std::abs(q(arg, j))) arg = i;
    const double sign = q(arg, j) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < d; ++i) m.components(j, i) = sign * q(i, j);
    m.explained_variance.push_back(std::max(0.0, ritz[j]));
  }
  return m;
}

Matrix transform(const PcaModel& m, const Matrix& x) {
  if (x.cols() != m.mean.size()) fail(Errc::WidthMismatch, "query width differs from the model");
  Matrix xc = x;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) xc(i, j) -= m.mean[j];
  Matrix z;
  kernels::matmul_nt(xc, m.components, z);
  return z;
}

Matrix inverse_transform(const PcaModel& m, const Matrix& z) {
  Matrix r;
  kernels::matmul(z, m.components, r);
  for (std::size_t i = 0; i < r.rows(); ++i)
    for (std::size_t j = 0; j < r.cols(); ++j) r(i, j) += m.mean[j];
  return r;
}

std::vector<double> reconstruction_errors(const PcaModel& m, const Matrix& x) {
  const Matrix r = inverse_transform(m, transform(m, x));
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double e = x(i, j) - r(i, j);
      s += e * e;
    }
    out[i] = s;
  }
  return out;
}

OutlierFlags pca_outliers(const PcaModel& m, const Matrix& x, double percentile) {
  OutlierFlags out;
  out.scores = reconstruction_errors(m, x);
  out.threshold = oc::calibrate_threshold(out.scores, percentile);
  out.flags = oc::flag_above(out.scores, out.threshold);
  return out;
}

}  // namespace zcam::decomp
