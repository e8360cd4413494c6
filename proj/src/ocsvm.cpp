#include "zcam/ocsvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <numeric>
#include <unordered_map>

#include "zcam/error.hpp"
#include "zcam/kernels.hpp"

namespace zcam::oc {
namespace {

// LRU cache of full kernel rows K(x_i, .).
class KernelCache {
 public:
  KernelCache(const Matrix& x, double gamma, std::size_t budget_bytes)
      : x_(x), gamma_(gamma) {
    const std::size_t row_bytes = std::max<std::size_t>(1, x.rows() * sizeof(double));
    capacity_ = std::max<std::size_t>(2, budget_bytes / row_bytes);
  }

  std::span<const double> row(std::size_t i) {
    if (auto it = index_.find(i); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->values;
    }
    if (lru_.size() >= capacity_) {
      index_.erase(lru_.back().key);
      lru_.pop_back();
    }
    lru_.push_front({i, std::vector<double>(x_.rows())});
    kernels::rbf_row(x_, x_.row(i), gamma_, lru_.front().values);
    index_[i] = lru_.begin();
    return lru_.front().values;
  }

 private:
  struct Entry {
    std::size_t key;
    std::vector<double> values;
  };
  const Matrix& x_;
  double gamma_;
  std::size_t capacity_;
  std::list<Entry> lru_;
  std::unordered_map<std::size_t, std::list<Entry>::iterator> index_;
};

void check_params(const Matrix& x, const OcsvmParams& p) {
  if (!(p.nu > 0.0)) fail(Errc::NonPositiveNu, "nu must be positive");
  if (p.nu > 1.0) fail(Errc::InvalidArgument, "nu must not exceed 1");
  if (!(p.gamma > 0.0)) fail(Errc::InvalidArgument, "gamma must be positive");
  if (x.rows() == 0) fail(Errc::EmptyData, "no training rows");
  if (x.rows() > p.max_rows)
    fail(Errc::TooLarge, "one-class SVM refuses " + std::to_string(x.rows()) +
                             " rows (limit " + std::to_string(p.max_rows) + "); use sgdocsvm");
}

}  // namespace

OcsvmDual solve_ocsvm_dual(const Matrix& x, const OcsvmParams& p) {
  check_params(x, p);
  const std::size_t n = x.rows();
  const double c = 1.0 / (p.nu * static_cast<double>(n));
  const std::size_t max_iter = p.max_iter ? p.max_iter : std::max<std::size_t>(10'000'000, 100 * n);
  constexpr double kTau = 1e-12;

  // Feasible start: fill alphas at the upper bound until the sum reaches one.
  std::vector<double> alpha(n, 0.0);
  double remaining = 1.0;
  for (std::size_t i = 0; i < n && remaining > 0.0; ++i) {
    alpha[i] = std::min(c, remaining);
    remaining -= alpha[i];
  }

  KernelCache cache(x, p.gamma, p.cache_mb << 20);
  std::vector<double> g(n, 0.0);  // gradient Q alpha
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] == 0.0) continue;
    const auto qi = cache.row(i);
    for (std::size_t t = 0; t < n; ++t) g[t] += alpha[i] * qi[t];
  }

  auto can_up = [&](std::size_t t) { return alpha[t] < c; };
  auto can_down = [&](std::size_t t) { return alpha[t] > 0.0; };

  OcsvmDual out;
  std::size_t iter = 0;
  double gap = 0.0;
  for (; iter < max_iter; ++iter) {
    // i: steepest ascent direction among variables that may increase.
    std::size_t i = n;
    double gmin = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t)
      if (can_up(t) && g[t] < gmin) {
        gmin = g[t];
        i = t;
      }
    double gmax = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t)
      if (can_down(t)) gmax = std::max(gmax, g[t]);
    gap = (i == n) ? 0.0 : gmax - gmin;
    if (i == n || gap < p.tol) break;

    // j: second-order choice among variables that may decrease.
    const auto qi = cache.row(i);
    std::size_t j = n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      if (!can_down(t)) continue;
      const double b = g[t] - gmin;
      if (b <= 0.0) continue;
      double a = 2.0 - 2.0 * qi[t];  // K(x,x) = 1 for RBF
      if (a <= 0.0) a = kTau;
      const double obj = -(b * b) / a;
      if (obj < best) {
        best = obj;
        j = t;
      }
    }
    if (j == n) break;
    const auto qj = cache.row(j);

    double quad = 2.0 - 2.0 * qi[j];
    if (quad <= 0.0) quad = kTau;
    const double old_i = alpha[i], old_j = alpha[j];
    const double delta = (g[i] - g[j]) / quad;
    const double sum = old_i + old_j;
    double ai = old_i - delta;
    double aj = old_j + delta;
    if (sum > c) {
      if (ai > c) {
        ai = c;
        aj = sum - c;
      }
    } else if (aj < 0.0) {
      aj = 0.0;
      ai = sum;
    }
    if (sum > c) {
      if (aj > c) {
        aj = c;
        ai = sum - c;
      }
    } else if (ai < 0.0) {
      ai = 0.0;
      aj = sum;
    }
    alpha[i] = ai;
    alpha[j] = aj;
    const double di = ai - old_i, dj = aj - old_j;
    const auto qi2 = cache.row(i);  // the j lookup may have evicted row i
    for (std::size_t t = 0; t < n; ++t) g[t] += di * qi2[t] + dj * qj[t];
  }

  // rho from free support vectors; fall back to the midpoint of the bounds.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] >= c) lb = std::max(lb, g[t]);
    else if (alpha[t] <= 0.0) ub = std::min(ub, g[t]);
    else {
      sum_free += g[t];
      ++n_free;
    }
  }
  if (n_free > 0) out.rho = sum_free / static_cast<double>(n_free);
  else if (std::isinf(ub)) out.rho = lb;
  else if (std::isinf(lb)) out.rho = ub;
  else out.rho = 0.5 * (ub + lb);

  double obj = 0.0;
  for (std::size_t t = 0; t < n; ++t) obj += alpha[t] * g[t];
  out.objective = 0.5 * obj;
  out.kkt_gap = gap;
  out.iterations = iter;
  out.alpha = std::move(alpha);
  return out;
}

OcsvmModel train_ocsvm(const Matrix& x, const OcsvmParams& params) {
  OcsvmDual dual = solve_ocsvm_dual(x, params);
  OcsvmModel m;
  m.gamma = params.gamma;
  m.nu = params.nu;
  m.n_train = x.rows();
  m.rho = dual.rho;
  m.iterations = dual.iterations;
  m.kkt_gap = dual.kkt_gap;
  m.objective = dual.objective;
  m.support_vectors = Matrix(0, x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (dual.alpha[i] > 0.0) {
      m.support_vectors.append_row(x.row(i));
      m.alpha.push_back(dual.alpha[i]);
    }
  }
  return m;
}

double decision(const OcsvmModel& m, std::span<const double> x) {
  if (x.size() != m.support_vectors.cols())
    fail(Errc::WidthMismatch, "query width differs from the model");
  std::vector<double> k(m.support_vectors.rows());
  kernels::serial::rbf_row(m.support_vectors, x, m.gamma, k);
  double s = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) s += m.alpha[i] * k[i];
  return s - m.rho;
}

std::vector<double> decision_function(const OcsvmModel& m, const Matrix& x) {
  if (x.cols() != m.support_vectors.cols())
    fail(Errc::WidthMismatch, "query width differs from the model");
  std::vector<double> out(x.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(x.rows()); ++i)
    out[i] = decision(m, x.row(static_cast<std::size_t>(i)));
  return out;
}

}  // namespace zcam::oc
