#include "zcam/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "zcam/error.hpp"
#include "zcam/linalg.hpp"
#include "zcam/rng.hpp"
#include "zcam/threshold.hpp"

namespace zcam::decomp {

std::string_view covariance_name(CovarianceType t) {
  switch (t) {
    case CovarianceType::Spherical: return "spherical";
    case CovarianceType::Tied: return "tied";
    case CovarianceType::Diag: return "diag";
    case CovarianceType::Full: return "full";
  }
  return "?";
}

CovarianceType parse_covariance_type(std::string_view name) {
  for (auto t : kAllCovarianceTypes)
    if (covariance_name(t) == name) return t;
  fail(Errc::Usage, "unknown covariance type '" + std::string(name) + "'");
}

namespace {

constexpr double kTiny = 10.0 * std::numeric_limits<double>::epsilon();

// Closest matrix (in the likelihood sense) with every eigenvalue >= floor.
Matrix floor_eigenvalues(const Matrix& s, double floor) {
  const std::size_t d = s.rows();
  Matrix shifted = s;
  for (std::size_t i = 0; i < d; ++i) shifted(i, i) -= floor;
  if (linalg::cholesky(shifted)) return s;
  auto eig = linalg::jacobi_eigen(s);
  Matrix out(d, d);
  for (std::size_t a = 0; a < d; ++a) {
    const double lam = std::max(eig.values[a], floor);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) out(i, j) += lam * eig.vectors(i, a) * eig.vectors(j, a);
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) out(i, j) = out(j, i) = 0.5 * (out(i, j) + out(j, i));
  return out;
}

struct Factor {
  Matrix chol;
  double log_det = 0.0;
};

std::vector<Factor> factorize(const GmmModel& m) {
  std::vector<Factor> f;
  for (const auto& c : m.covariances) {
    auto l = linalg::cholesky(c);
    if (!l) fail(Errc::InvalidArgument, "covariance is not positive definite");
    Factor fc{std::move(*l), 0.0};
    for (std::size_t i = 0; i < c.rows(); ++i) fc.log_det += 2.0 * std::log(fc.chol(i, i));
    f.push_back(std::move(fc));
  }
  return f;
}

// n x K matrix of log(w_k) + log N(x_i | mu_k, Sigma_k).
Matrix weighted_log_prob(const GmmModel& m, const Matrix& x) {
  if (x.cols() != m.dim()) fail(Errc::WidthMismatch, "query width differs from the mixture");
  const auto factors = factorize(m);
  const std::size_t n = x.rows(), d = m.dim(), k = m.components();
  const double log2pi = std::log(2.0 * std::numbers::pi);
  Matrix out(n, k);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    std::vector<double> y(d);
    for (std::size_t c = 0; c < k; ++c) {
      const Matrix& l = factors[c].chol;
      double q = 0.0;
      for (std::size_t a = 0; a < d; ++a) {
        double s = x(i, a) - m.means(c, a);
        for (std::size_t b = 0; b < a; ++b) s -= l(a, b) * y[b];
        y[a] = s / l(a, a);
        q += y[a] * y[a];
      }
      out(i, c) = std::log(m.weights[c]) - 0.5 * (static_cast<double>(d) * log2pi + factors[c].log_det + q);
    }
  }
  return out;
}

double log_sum_exp(std::span<const double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  if (std::isinf(mx)) return mx;
  double s = 0.0;
  for (double a : v) s += std::exp(a - mx);
  return mx + std::log(s);
}

// Fills resp with posteriors; returns the total log-likelihood.
double e_step(const GmmModel& m, const Matrix& x, Matrix& resp) {
  resp = weighted_log_prob(m, x);
  double total = 0.0;
  for (std::size_t i = 0; i < resp.rows(); ++i) {
    auto r = resp.row(i);
    const double lse = log_sum_exp(r);
    total += lse;
    for (auto& v : r) v = std::exp(v - lse);
  }
  return total;
}

void m_step(GmmModel& m, const Matrix& x, const Matrix& resp, double floor) {
  const std::size_t n = x.rows(), d = x.cols(), k = resp.cols();
  std::vector<double> nk(k, kTiny);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c) nk[c] += resp(i, c);

  m.weights.assign(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) m.weights[c] = nk[c] / static_cast<double>(n);
  m.means = Matrix(k, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c) {
      const double r = resp(i, c);
      if (r == 0.0) continue;
      for (std::size_t a = 0; a < d; ++a) m.means(c, a) += r * x(i, a);
    }
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t a = 0; a < d; ++a) m.means(c, a) /= nk[c];

  std::vector<Matrix> scatter(k, Matrix(d, d));
  const bool full_scatter = m.type == CovarianceType::Full || m.type == CovarianceType::Tied;
  std::vector<double> e(d);
  for (std::size_t c = 0; c < k; ++c) {
    Matrix& s = scatter[c];
    for (std::size_t i = 0; i < n; ++i) {
      const double r = resp(i, c);
      if (r == 0.0) continue;
      for (std::size_t a = 0; a < d; ++a) e[a] = x(i, a) - m.means(c, a);
      if (full_scatter) {
        for (std::size_t a = 0; a < d; ++a)
          for (std::size_t b = 0; b <= a; ++b) s(a, b) += r * e[a] * e[b];
      } else {
        for (std::size_t a = 0; a < d; ++a) s(a, a) += r * e[a] * e[a];
      }
    }
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < a; ++b) s(b, a) = s(a, b);
  }

  m.covariances.assign(k, Matrix(d, d));
  switch (m.type) {
    case CovarianceType::Full:
      for (std::size_t c = 0; c < k; ++c) {
        Matrix s = scatter[c];
        for (std::size_t a = 0; a < d * d; ++a) s.data()[a] /= nk[c];
        m.covariances[c] = floor_eigenvalues(s, floor);
      }
      break;
    case CovarianceType::Tied: {
      Matrix s(d, d);
      for (std::size_t c = 0; c < k; ++c)
        for (std::size_t a = 0; a < d * d; ++a) s.data()[a] += scatter[c].data()[a];
      for (std::size_t a = 0; a < d * d; ++a) s.data()[a] /= static_cast<double>(n);
      const Matrix f = floor_eigenvalues(s, floor);
      for (auto& cv : m.covariances) cv = f;
      break;
    }
    case CovarianceType::Diag:
      for (std::size_t c = 0; c < k; ++c)
        for (std::size_t a = 0; a < d; ++a) m.covariances[c](a, a) = std::max(scatter[c](a, a) / nk[c], floor);
      break;
    case CovarianceType::Spherical:
      for (std::size_t c = 0; c < k; ++c) {
        double v = 0.0;
        for (std::size_t a = 0; a < d; ++a) v += scatter[c](a, a) / nk[c];
        v = std::max(v / static_cast<double>(d), floor);
        for (std::size_t a = 0; a < d; ++a) m.covariances[c](a, a) = v;
      }
      break;
  }
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return s;
}

// k-means++ seeding followed by Lloyd iterations; returns hard assignments.
std::vector<std::size_t> kmeans(const Matrix& x, std::size_t k, Rng& rng, std::size_t iters) {
  const std::size_t n = x.rows();
  Matrix centers(0, x.cols());
  centers.append_row(x.row(rng.below(n)));
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  while (centers.rows() < k) {
    const auto last = centers.row(centers.rows() - 1);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      best[i] = std::min(best[i], sq_dist(x.row(i), last));
      total += best[i];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        u -= best[i];
        if (u < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(n);
    }
    centers.append_row(x.row(pick));
  }

  std::vector<std::size_t> assign(n, k);
  for (std::size_t it = 0; it < iters; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t arg = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double dd = sq_dist(x.row(i), centers.row(c));
        if (dd < bd) {
          bd = dd;
          arg = c;
        }
      }
      if (assign[i] != arg) {
        assign[i] = arg;
        changed = true;
      }
    }
    if (!changed) break;
    Matrix sums(k, x.cols());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[assign[i]];
      for (std::size_t j = 0; j < x.cols(); ++j) sums(assign[i], j) += x(i, j);
    }
    for (std::size_t c = 0; c < k; ++c)
      if (counts[c] > 0)
        for (std::size_t j = 0; j < x.cols(); ++j) centers(c, j) = sums(c, j) / static_cast<double>(counts[c]);
  }
  return assign;
}

GmmModel fit_once(const Matrix& x, std::size_t k, CovarianceType type, std::uint64_t seed, const GmmParams& p) {
  GmmModel m;
  m.type = type;
  Rng rng(seed);
  const auto assign = kmeans(x, k, rng, p.kmeans_iter);
  Matrix resp(x.rows(), k);
  for (std::size_t i = 0; i < x.rows(); ++i) resp(i, assign[i]) = 1.0;
  m_step(m, x, resp, p.covariance_floor);

  const double n = static_cast<double>(x.rows());
  for (std::size_t it = 1; it <= p.max_iter; ++it) {
    const double ll = e_step(m, x, resp);
    m.log_likelihood_history.push_back(ll);
    m.log_likelihood = ll;
    m.iterations = it;
    const auto& h = m.log_likelihood_history;
    if (h.size() >= 2 && (h[h.size() - 1] - h[h.size() - 2]) / n < p.tol) {
      m.converged = true;
      break;
    }
    if (it == p.max_iter) break;
    m_step(m, x, resp, p.covariance_floor);
  }
  return m;
}

}  // namespace

GmmModel fit_gmm(const Matrix& x, std::size_t k, CovarianceType type, std::uint64_t seed, const GmmParams& params) {
  if (k == 0) fail(Errc::InvalidArgument, "component count must be positive");
  if (x.rows() < k) fail(Errc::TooFewRows, std::to_string(x.rows()) + " rows for " + std::to_string(k) + " components");
  if (x.cols() == 0) fail(Errc::EmptyData, "no columns");
  GmmModel best;
  bool have = false;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, params.n_init); ++r) {
    GmmModel m = fit_once(x, k, type, mix_seed(seed, r), params);
    if (!have || m.log_likelihood > best.log_likelihood) {
      best = std::move(m);
      have = true;
    }
  }
  return best;
}

std::vector<double> log_density(const GmmModel& m, const Matrix& x) {
  const Matrix lp = weighted_log_prob(m, x);
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = log_sum_exp(lp.row(i));
  return out;
}

Matrix responsibilities(const GmmModel& m, const Matrix& x) {
  Matrix r;
  e_step(m, x, r);
  return r;
}

std::size_t free_parameters(std::size_t k, std::size_t d, CovarianceType type) {
  switch (type) {
    case CovarianceType::Spherical: return k * (d + 1) + k - 1;
    case CovarianceType::Diag: return k * 2 * d + k - 1;
    case CovarianceType::Tied: return k * d + d * (d + 1) / 2 + k - 1;
    case CovarianceType::Full: return k * d + k * d * (d + 1) / 2 + k - 1;
  }
  return 0;
}

double bic(const GmmModel& m, std::size_t n_rows) {
  return static_cast<double>(free_parameters(m.components(), m.dim(), m.type)) *
             std::log(static_cast<double>(n_rows)) -
         2.0 * m.log_likelihood;
}

BicSweepResult bic_sweep(const Matrix& x, std::size_t k_max, std::uint64_t seed, const GmmParams& params) {
  if (k_max == 0) fail(Errc::InvalidArgument, "k_max must be at least 1");
  BicSweepResult out;
  for (std::size_t k = 1; k <= k_max && k <= x.rows(); ++k) {
    for (auto t : kAllCovarianceTypes) {
      const GmmModel m = fit_gmm(x, k, t, seed, params);
      out.grid.push_back({k, t, bic(m, x.rows())});
      if (out.grid.back().bic < out.grid[out.best].bic) out.best = out.grid.size() - 1;
    }
  }
  return out;
}

OutlierFlags gmm_outliers(const GmmModel& m, const Matrix& x, double percentile) {
  OutlierFlags out;
  out.scores = log_density(m, x);
  out.threshold = oc::calibrate_threshold(out.scores, 100.0 - percentile);
  out.flags = oc::flag_below(out.scores, out.threshold);
  return out;
}

}  // namespace zcam::decomp
