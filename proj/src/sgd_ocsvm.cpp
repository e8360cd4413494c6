#include "zcam/sgd_ocsvm.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "zcam/error.hpp"
#include "zcam/kernels.hpp"
#include "zcam/rng.hpp"
#include "zcam/threshold.hpp"

namespace zcam::oc {

FourierMap make_fourier_map(std::size_t input_dim, std::size_t components, double gamma,
                            std::uint64_t seed) {
  if (!(gamma > 0.0)) fail(Errc::InvalidArgument, "feature map gamma must be positive");
  FourierMap m;
  m.gamma = gamma;
  m.seed = seed;
  m.w = Matrix(components, input_dim);
  m.offset.resize(components);
  Rng rng(mix_seed(seed, 0x5f0c));
  const double sd = std::sqrt(2.0 * gamma);
  for (std::size_t r = 0; r < components; ++r)
    for (std::size_t c = 0; c < input_dim; ++c) m.w(r, c) = sd * rng.normal();
  for (auto& b : m.offset) b = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return m;
}

Matrix FourierMap::transform(const Matrix& x) const {
  if (x.cols() != input_dim()) fail(Errc::WidthMismatch, "query width differs from the feature map");
  Matrix z;
  kernels::matmul_nt(x, w, z);
  const double scale = std::sqrt(2.0 / static_cast<double>(components()));
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto r = z.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = scale * std::cos(r[j] + offset[j]);
  }
  return z;
}

namespace {

double auto_gamma(const Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols();
  double var_sum = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = x(i, c);
      const double delta = v - mean;
      mean += delta / static_cast<double>(i + 1);
      m2 += delta * (v - mean);
    }
    var_sum += m2 / static_cast<double>(n);
  }
  const double var = var_sum / static_cast<double>(d);
  return var > 0.0 ? 1.0 / (static_cast<double>(d) * var) : 1.0;
}

}  // namespace

SgdOcsvmModel train_sgd_ocsvm(const Matrix& x, const SgdOcsvmParams& p) {
  if (!(p.nu > 0.0)) fail(Errc::NonPositiveNu, "nu must be positive");
  if (p.nu > 1.0) fail(Errc::InvalidArgument, "nu must not exceed 1");
  if (!(p.eta0 > 0.0)) fail(Errc::InvalidArgument, "eta0 must be positive");
  if (p.epochs == 0) fail(Errc::InvalidArgument, "epochs must be at least 1");
  if (x.rows() == 0 || x.cols() == 0) fail(Errc::EmptyData, "no training rows");

  SgdOcsvmModel m;
  m.nu = p.nu;
  m.eta0 = p.eta0;
  const double gamma = p.gamma > 0.0 ? p.gamma : auto_gamma(x);
  m.map = make_fourier_map(x.cols(), p.components, gamma, p.seed);
  const Matrix phi = m.map.transform(x);
  const std::size_t n = phi.rows(), dim = phi.cols();
  m.w.assign(dim, 0.0);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(p.seed, 0x56d));
  const double inv_nu = 1.0 / p.nu;
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < p.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t idx : order) {
      const auto f = phi.row(idx);
      double s = 0.0, wsq = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        s += m.w[j] * f[j];
        wsq += m.w[j] * m.w[j];
      }
      const double hinge = std::max(0.0, m.rho - s);
      total += 0.5 * wsq + inv_nu * hinge - m.rho;

      const double eta = p.eta0 / (1.0 + p.eta0 * static_cast<double>(t));
      if (hinge > 0.0) {
        for (std::size_t j = 0; j < dim; ++j) m.w[j] -= eta * (m.w[j] - inv_nu * f[j]);
        m.rho -= eta * (inv_nu - 1.0);
      } else {
        for (std::size_t j = 0; j < dim; ++j) m.w[j] -= eta * m.w[j];
        m.rho += eta;
      }
      ++t;
    }
    m.epoch_objective.push_back(total / static_cast<double>(n));
  }

  // Place rho at the nu-quantile of training scores so roughly nu n rows fall outside.
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto f = phi.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < dim; ++j) s += m.w[j] * f[j];
    scores[i] = s;
  }
  m.rho = percentile(scores, 100.0 * p.nu);
  return m;
}

std::vector<double> decision_function(const SgdOcsvmModel& m, const Matrix& x) {
  const Matrix phi = m.map.transform(x);
  std::vector<double> out(phi.rows());
  for (std::size_t i = 0; i < phi.rows(); ++i) {
    const auto f = phi.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) s += m.w[j] * f[j];
    out[i] = s - m.rho;
  }
  return out;
}

}  // namespace zcam::oc
