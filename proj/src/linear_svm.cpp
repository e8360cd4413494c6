#include "zcam/linear_svm.hpp"

#include <algorithm>
#include <numeric>

#include "zcam/error.hpp"
#include "zcam/rng.hpp"

namespace zcam::ml {

LinearSvmModel train_linear_svm(const Matrix& x, std::span<const int> y, int n_classes,
                                const LinearSvmParams& params) {
  if (x.rows() == 0) fail(Errc::EmptyData, "empty training matrix");
  if (y.size() != x.rows()) fail(Errc::DimensionMismatch, "label count differs from row count");
  const std::size_t k_count = static_cast<std::size_t>(n_classes), d = x.cols(), n = x.rows();
  LinearSvmModel m;
  m.weights = Matrix(k_count, d);
  m.bias.assign(k_count, 0.0);
  m.epochs_run.assign(k_count, 0);

  const auto kk = static_cast<std::ptrdiff_t>(k_count);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ks = 0; ks < kk; ++ks) {
    const auto k = static_cast<std::size_t>(ks);
    auto w = m.weights.row(k);
    double& b = m.bias[k];
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed(params.seed, k));
    const auto margin = [&](std::size_t i) {
      double s = b;
      const auto xi = x.row(i);
      for (std::size_t j = 0; j < d; ++j) s += w[j] * xi[j];
      return (static_cast<std::size_t>(y[i]) == k ? 1.0 : -1.0) * s;
    };
    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
      const double lr = params.learning_rate / (1.0 + static_cast<double>(epoch));
      rng.shuffle(order);
      std::size_t violations = 0;
      for (std::size_t i : order) {
        const double yi = static_cast<std::size_t>(y[i]) == k ? 1.0 : -1.0;
        const bool violated = margin(i) < 1.0;
        const double shrink = 1.0 - lr * params.l2;
        const auto xi = x.row(i);
        for (std::size_t j = 0; j < d; ++j) w[j] = w[j] * shrink + (violated ? lr * yi * xi[j] : 0.0);
        if (violated) {
          b += lr * yi;
          ++violations;
        }
      }
      m.epochs_run[k] = epoch + 1;
      if (violations == 0) {
        bool clean = true;
        for (std::size_t i = 0; i < n && clean; ++i) clean = margin(i) >= 1.0;
        if (clean) break;
      }
    }
  }
  return m;
}

Matrix margins(const LinearSvmModel& model, const Matrix& x) {
  if (x.cols() != model.weights.cols()) fail(Errc::DimensionMismatch, "svm input width");
  Matrix out(x.rows(), model.weights.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t k = 0; k < model.weights.rows(); ++k) {
      double s = model.bias[k];
      for (std::size_t j = 0; j < x.cols(); ++j) s += model.weights(k, j) * x(i, j);
      out(i, k) = s;
    }
  return out;
}

Matrix predict_proba(const LinearSvmModel& model, const Matrix& x) {
  Matrix p = margins(model, x);
  for (std::size_t i = 0; i < p.rows(); ++i) {
    auto r = p.row(i);
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    const double mn = *lo, mx = *hi;
    if (!(mx > mn)) {
      std::fill(r.begin(), r.end(), 1.0 / double(r.size()));
      continue;
    }
    double s = 0.0;
    for (double& v : r) s += (v = (v - mn) / (mx - mn));
    for (double& v : r) v /= s;
  }
  return p;
}

}  // namespace zcam::ml
