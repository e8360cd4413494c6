#include "zcam/gnb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "zcam/error.hpp"

namespace zcam::ml {

GnbModel train_gnb(const Matrix& x, std::span<const int> y, int n_classes, double floor_ratio) {
  if (x.rows() == 0) fail(Errc::EmptyData, "empty training matrix");
  if (y.size() != x.rows()) fail(Errc::DimensionMismatch, "label count differs from row count");
  const std::size_t k_count = static_cast<std::size_t>(n_classes), d = x.cols(), n = x.rows();

  double max_var = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x(i, j);
    mean /= double(n);
    for (std::size_t i = 0; i < n; ++i) m2 += (x(i, j) - mean) * (x(i, j) - mean);
    max_var = std::max(max_var, m2 / double(n));
  }

  GnbModel m;
  m.var_floor = floor_ratio * max_var;
  m.means = Matrix(k_count, d);
  m.variances = Matrix(k_count, d);
  std::vector<double> counts(k_count, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(y[i]);
    counts[c] += 1.0;
    for (std::size_t j = 0; j < d; ++j) m.means(c, j) += x(i, j);
  }
  for (std::size_t c = 0; c < k_count; ++c)
    for (std::size_t j = 0; j < d; ++j) m.means(c, j) = counts[c] > 0 ? m.means(c, j) / counts[c] : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(y[i]);
    for (std::size_t j = 0; j < d; ++j) {
      const double dv = x(i, j) - m.means(c, j);
      m.variances(c, j) += dv * dv;
    }
  }
  for (std::size_t c = 0; c < k_count; ++c) {
    m.log_prior.push_back(counts[c] > 0 ? std::log(counts[c] / double(n)) : -INFINITY);
    for (std::size_t j = 0; j < d; ++j)
      m.variances(c, j) = (counts[c] > 0 ? m.variances(c, j) / counts[c] : 0.0) + m.var_floor;
  }
  // A zero floor (all features constant) would leave zero variances.
  for (double& v : m.variances.data())
    if (v <= 0.0) v = 1e-300;
  return m;
}

Matrix joint_log_likelihood(const GnbModel& model, const Matrix& x) {
  const std::size_t k_count = model.log_prior.size(), d = model.means.cols();
  if (x.cols() != d) fail(Errc::DimensionMismatch, "gnb input width");
  Matrix out(x.rows(), k_count);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t c = 0; c < k_count; ++c) {
      double s = model.log_prior[c];
      for (std::size_t j = 0; j < d; ++j) {
        const double var = model.variances(c, j), dv = x(i, j) - model.means(c, j);
        s -= 0.5 * std::log(2.0 * std::numbers::pi * var) + dv * dv / (2.0 * var);
      }
      out(i, c) = s;
    }
  return out;
}

Matrix predict_proba(const GnbModel& model, const Matrix& x) {
  Matrix p = joint_log_likelihood(model, x);
  for (std::size_t i = 0; i < p.rows(); ++i) {
    auto r = p.row(i);
    const double mx = *std::max_element(r.begin(), r.end());
    double s = 0.0;
    for (double& v : r) s += (v = std::exp(v - mx));
    for (double& v : r) v /= s;
  }
  return p;
}

}  // namespace zcam::ml
