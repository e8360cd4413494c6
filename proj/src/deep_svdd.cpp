#include "zcam/deep_svdd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "zcam/error.hpp"
#include "zcam/kernels.hpp"
#include "zcam/rng.hpp"
#include "zcam/threshold.hpp"

namespace zcam::oc {
namespace {

std::vector<std::size_t> layer_sizes(const DeepSvddConfig& c) {
  std::vector<std::size_t> s{c.input_dim};
  s.insert(s.end(), c.hidden.begin(), c.hidden.end());
  s.push_back(c.latent);
  return s;
}

void relu(Matrix& m) {
  double* p = m.data().data();
  const std::size_t n = m.rows() * m.cols();
  for (std::size_t i = 0; i < n; ++i) p[i] = p[i] > 0.0 ? p[i] : 0.0;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

void check_width(const std::vector<Matrix>& w, const Matrix& x) {
  if (w.empty() || x.cols() != w.front().rows())
    fail(Errc::WidthMismatch, "input width " + std::to_string(x.cols()) + " does not match the network");
}

}  // namespace

std::vector<Matrix> init_weights(const DeepSvddConfig& config) {
  const auto sizes = layer_sizes(config);
  std::vector<Matrix> w;
  Rng rng(mix_seed(config.seed, 0xd5dd));
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double lim = std::sqrt(6.0 / static_cast<double>(sizes[l] + sizes[l + 1]));
    Matrix m(sizes[l], sizes[l + 1]);
    double* p = m.data().data();
    for (std::size_t i = 0; i < sizes[l] * sizes[l + 1]; ++i) p[i] = rng.uniform(-lim, lim);
    w.push_back(std::move(m));
  }
  return w;
}

Matrix forward(const std::vector<Matrix>& weights, const Matrix& x) {
  check_width(weights, x);
  Matrix h = x, next;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    kernels::matmul(h, weights[l], next);
    if (l + 1 < weights.size()) relu(next);
    std::swap(h, next);
  }
  return h;
}

std::vector<double> init_center(const std::vector<Matrix>& weights, const Matrix& x, double eps) {
  const Matrix z = forward(weights, x);
  std::vector<double> c(z.cols(), 0.0);
  // Running mean: exact when every output is identical.
  for (std::size_t i = 0; i < z.rows(); ++i)
    for (std::size_t j = 0; j < z.cols(); ++j) c[j] += (z(i, j) - c[j]) / static_cast<double>(i + 1);
  for (auto& v : c)
    if (std::abs(v) < eps) v = v < 0.0 ? -eps : eps;
  return c;
}

double svdd_loss(const std::vector<Matrix>& weights, const std::vector<double>& center, const Matrix& x,
                 std::vector<Matrix>* grad, double radius_sq, double nu) {
  check_width(weights, x);
  const std::size_t n = x.rows(), layers = weights.size();
  if (n == 0) fail(Errc::EmptyData, "empty batch");
  std::vector<Matrix> acts(layers + 1);
  acts[0] = x;
  for (std::size_t l = 0; l < layers; ++l) {
    kernels::matmul(acts[l], weights[l], acts[l + 1]);
    if (l + 1 < layers) relu(acts[l + 1]);
  }
  const Matrix& z = acts[layers];
  const bool soft = radius_sq >= 0.0;
  const double nn = static_cast<double>(n);

  Matrix delta(n, z.cols());
  double loss = soft ? radius_sq : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < z.cols(); ++j) {
      const double e = z(i, j) - center[j];
      d += e * e;
    }
    double coef;
    if (soft) {
      const double excess = d - radius_sq;
      loss += excess > 0.0 ? excess / (nu * nn) : 0.0;
      coef = excess > 0.0 ? 2.0 / (nu * nn) : 0.0;
    } else {
      loss += d / nn;
      coef = 2.0 / nn;
    }
    for (std::size_t j = 0; j < z.cols(); ++j) delta(i, j) = coef * (z(i, j) - center[j]);
  }
  if (!grad) return loss;

  grad->resize(layers);
  Matrix back;
  for (std::size_t l = layers; l-- > 0;) {
    kernels::matmul_tn(acts[l], delta, (*grad)[l]);
    if (l == 0) break;
    kernels::matmul(delta, transpose(weights[l]), back);
    const Matrix& a = acts[l];
    double* b = back.data().data();
    const double* ap = a.data().data();
    for (std::size_t i = 0; i < a.rows() * a.cols(); ++i)
      if (ap[i] <= 0.0) b[i] = 0.0;
    std::swap(delta, back);
  }
  return loss;
}

DeepSvddModel train_deep_svdd(const Matrix& x, const DeepSvddConfig& config) {
  if (x.cols() != config.input_dim)
    fail(Errc::WidthMismatch, "training width " + std::to_string(x.cols()) + " != configured input " +
                                  std::to_string(config.input_dim));
  if (x.rows() == 0) fail(Errc::EmptyData, "no training rows");
  if (config.batch_size == 0 || config.epochs == 0)
    fail(Errc::InvalidArgument, "batch size and epochs must be positive");
  if (config.soft_boundary && !(config.nu > 0.0 && config.nu <= 1.0))
    fail(Errc::NonPositiveNu, "soft-boundary nu must lie in (0, 1]");

  DeepSvddModel m;
  m.config = config;
  m.weights = init_weights(config);
  m.center = init_center(m.weights, x, config.center_eps);

  const std::size_t n = x.rows();
  std::vector<Matrix> mom1, mom2, grad;
  for (const auto& w : m.weights) {
    mom1.emplace_back(w.rows(), w.cols());
    mom2.emplace_back(w.rows(), w.cols());
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(config.seed, 0xba7c));
  std::size_t step = 0;
  double radius_sq = config.soft_boundary ? 0.0 : -1.0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_total = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      Matrix batch = x.select_rows(std::span<const std::size_t>(order).subspan(start, end - start));
      const double loss = svdd_loss(m.weights, m.center, batch, &grad, radius_sq, config.nu);
      epoch_total += loss * static_cast<double>(end - start);

      ++step;
      const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      for (std::size_t l = 0; l < m.weights.size(); ++l) {
        double* w = m.weights[l].data().data();
        double* v1 = mom1[l].data().data();
        double* v2 = mom2[l].data().data();
        const double* g = grad[l].data().data();
        const std::size_t len = m.weights[l].rows() * m.weights[l].cols();
        for (std::size_t i = 0; i < len; ++i) {
          v1[i] = config.beta1 * v1[i] + (1.0 - config.beta1) * g[i];
          v2[i] = config.beta2 * v2[i] + (1.0 - config.beta2) * g[i] * g[i];
          w[i] -= config.learning_rate * (v1[i] / bc1) / (std::sqrt(v2[i] / bc2) + config.adam_eps);
        }
      }
    }
    m.epoch_loss.push_back(epoch_total / static_cast<double>(n));
    if (config.soft_boundary && epoch + 1 >= config.warmup_epochs) {
      const auto d = svdd_distances(m, x);
      radius_sq = percentile(d, 100.0 * (1.0 - config.nu));
    }
  }

  const auto d = svdd_distances(m, x);
  if (config.soft_boundary) {
    m.radius_sq = radius_sq;
    m.threshold = radius_sq;
  } else {
    m.threshold = calibrate_threshold(d, config.percentile);
  }
  return m;
}

std::vector<double> svdd_distances(const DeepSvddModel& m, const Matrix& x) {
  const Matrix z = forward(m.weights, x);
  std::vector<double> out(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < z.cols(); ++j) {
      const double e = z(i, j) - m.center[j];
      d += e * e;
    }
    out[i] = d;
  }
  return out;
}

}  // namespace zcam::oc
