#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "support/synth.hpp"
#include "zcam/error.hpp"
#include "zcam/gmm.hpp"
#include "zcam/linalg.hpp"
#include "zcam/pca.hpp"
#include "zcam/threshold.hpp"

using namespace zcam;
using namespace zcam::decomp;
using namespace zcam::test;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Io;
}

Matrix sample_cov(const Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols();
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j) / double(n);
  Matrix c(d, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) c(a, b) += (x(i, a) - mean[a]) * (x(i, b) - mean[b]) / double(n - 1);
  return c;
}

Matrix three_clusters(std::uint64_t seed, std::size_t per = 150) {
  return vstack({gaussian_blob(per, {0, 0}, 0.5, seed), gaussian_blob(per, {8, 0}, 0.5, seed + 100),
                 gaussian_blob(per, {0, 8}, 0.5, seed + 200)});
}

}  // namespace

TEST_CASE("jacobi eigen against the 3x3 closed form") {
  const Matrix a{{4, 1, 0.5}, {1, 3, -0.25}, {0.5, -0.25, 2}};
  const auto e = linalg::jacobi_eigen(a);
  const auto o = symmetric3_eigenvalues({{{4, 1, 0.5}, {1, 3, -0.25}, {0.5, -0.25, 2}}});
  for (int i = 0; i < 3; ++i) CHECK(std::abs(e.values[i] - o[i]) < 1e-12);
  const auto l = linalg::cholesky(a);
  REQUIRE(l);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += (*l)(i, k) * (*l)(j, k);
      CHECK(std::abs(s - a(i, j)) < 1e-12);
    }
  CHECK_FALSE(linalg::cholesky(Matrix{{1, 2}, {2, 1}}).has_value());
}

TEST_CASE("pca axes on a 5x3 hand matrix match the covariance eigendecomposition") {
  const Matrix x{{2.5, 2.4, 0.5}, {0.5, 0.7, 1.9}, {2.2, 2.9, -0.3}, {1.9, 2.2, 0.8}, {3.1, 3.0, 0.1}};
  const Matrix c = sample_cov(x);
  const auto o = symmetric3_eigenvalues({{{c(0, 0), c(0, 1), c(0, 2)}, {c(1, 0), c(1, 1), c(1, 2)},
                                          {c(2, 0), c(2, 1), c(2, 2)}}});
  const auto m = fit_pca(x, 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(std::abs(m.explained_variance[k] - o[k]) < 1e-8);
    // C v = lambda v
    auto v = m.components.row(k);
    for (std::size_t a = 0; a < 3; ++a) {
      double cv = 0.0;
      for (std::size_t b = 0; b < 3; ++b) cv += c(a, b) * v[b];
      CHECK(std::abs(cv - o[k] * v[a]) < 1e-8);
    }
    // largest-magnitude coordinate positive
    std::size_t arg = 0;
    for (std::size_t a = 1; a < 3; ++a)
      if (std::abs(v[a]) > std::abs(v[arg])) arg = a;
    CHECK(v[arg] > 0.0);
    for (std::size_t j = 0; j < 3; ++j) {
      double dot = 0.0;
      for (std::size_t a = 0; a < 3; ++a) dot += v[a] * m.components(j, a);
      CHECK(std::abs(dot - (j == k ? 1.0 : 0.0)) < 1e-8);
    }
  }
  for (double e : reconstruction_errors(m, x)) CHECK(e < 1e-20 + 1e-12);
}

TEST_CASE("pca reconstruction behaviour") {
  Matrix rank1(20, 4);
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 4; ++j) rank1(i, j) = double(i) * (1.0 + double(j));
  const auto m1 = fit_pca(rank1, 1);
  for (double e : reconstruction_errors(m1, rank1)) CHECK(e < 1e-18 * 1e6);

  // a point off the axis is flagged
  Matrix cal = rank1;
  const auto flags = pca_outliers(m1, cal, 95.0);
  Matrix probe = rank1.select_rows(std::vector<std::size_t>{3});
  probe(0, 0) += 5.0;
  probe(0, 1) -= 2.5;
  CHECK(reconstruction_errors(m1, probe)[0] > flags.threshold);

  const Matrix x = gaussian_blob(200, {1, 2, 3, 4, 5}, 1.0, 3);
  double prev = 1e300;
  for (std::size_t k = 1; k <= 5; ++k) {
    const auto m = fit_pca(x, k);
    double total = 0.0;
    for (double e : reconstruction_errors(m, x)) total += e;
    CHECK(total <= prev + 1e-9);
    prev = total;
    for (std::size_t i = 1; i < k; ++i) CHECK(m.explained_variance[i] <= m.explained_variance[i - 1]);
  }
  CHECK(prev < 1e-18 * 200 * 1e6);
  const auto m2 = fit_pca(x, 2);
  const auto f = pca_outliers(m2, x, 95.0);
  CHECK(oc::count_outliers(f.flags) == 10);
  CHECK(code_of([&] { fit_pca(x, 6); }) == Errc::KTooLarge);
  CHECK(fit_pca(x, 2) == m2);
}

TEST_CASE("gmm with one full component is the closed-form gaussian") {
  Matrix x = gaussian_blob(300, {1, -2, 0.5}, 1.0, 4);
  for (std::size_t i = 0; i < x.rows(); ++i) x(i, 2) += 0.6 * x(i, 0);  // correlate
  const auto g = fit_gmm(x, 1, CovarianceType::Full, 0);
  const auto o = fit_single_gaussian(x);
  for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(g.means(0, j) - o.mean[j]) < 1e-8);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) CHECK(std::abs(g.covariances[0](a, b) - o.cov(a, b)) < 1e-8);
  CHECK(std::abs(g.log_likelihood - o.log_likelihood) < 1e-8 * std::abs(o.log_likelihood));
  CHECK(g.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("gmm log-likelihood never decreases") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Matrix x = vstack({three_clusters(seed), gaussian_blob(40, {4, 4}, 3.0, seed + 7)});
    for (auto type : kAllCovarianceTypes) {
      const auto g = fit_gmm(x, 4, type, seed);
      CAPTURE(covariance_name(type));
      for (std::size_t i = 1; i < g.log_likelihood_history.size(); ++i)
        CHECK(g.log_likelihood_history[i] >= g.log_likelihood_history[i - 1] - 1e-10);
      double ws = 0.0;
      for (double w : g.weights) ws += w;
      CHECK(ws == doctest::Approx(1.0).epsilon(1e-12));
      const auto r = responsibilities(g, x);
      for (std::size_t i = 0; i < r.rows(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < r.cols(); ++k) s += r(i, k);
        CHECK(std::abs(s - 1.0) < 1e-9);
      }
    }
  }
}

TEST_CASE("two separated blobs give one-hot responsibilities") {
  const Matrix x = vstack({gaussian_blob(100, {0, 0}, 1.0, 1), gaussian_blob(100, {10, 10}, 1.0, 2)});
  const auto g = fit_gmm(x, 2, CovarianceType::Full, 3);
  const std::size_t lo = g.means(0, 0) < g.means(1, 0) ? 0 : 1;
  CHECK(std::abs(g.means(lo, 0)) < 0.3);
  CHECK(std::abs(g.means(1 - lo, 0) - 10.0) < 0.3);
  const auto r = responsibilities(g, x);
  for (std::size_t i = 0; i < 200; ++i) CHECK(std::max(r(i, 0), r(i, 1)) > 0.999);
}

TEST_CASE("bic picks three components on three clusters") {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) hits += bic_sweep(three_clusters(seed * 31), 6, seed).argmin().k == 3;
  CHECK(hits >= 8);
  const auto one = bic_sweep(three_clusters(5), 1, 0);
  CHECK(one.grid.size() == 4);
  CHECK(one.argmin().k == 1);
}

TEST_CASE("bic free-parameter counts") {
  CHECK(free_parameters(3, 4, CovarianceType::Spherical) == 3 * 5 + 2);
  CHECK(free_parameters(3, 4, CovarianceType::Diag) == 3 * 8 + 2);
  CHECK(free_parameters(3, 4, CovarianceType::Tied) == 12 + 10 + 2);
  CHECK(free_parameters(3, 4, CovarianceType::Full) == 12 + 30 + 2);
  const Matrix x = three_clusters(1);
  const auto g = fit_gmm(x, 2, CovarianceType::Diag, 0);
  CHECK(bic(g, x.rows()) ==
        doctest::Approx(double(free_parameters(2, 2, CovarianceType::Diag)) * std::log(450.0) - 2.0 * g.log_likelihood));
}

TEST_CASE("gmm outliers are the low-density tail") {
  const Matrix x = three_clusters(2);
  const auto g = fit_gmm(x, 3, CovarianceType::Diag, 1);
  const auto f = gmm_outliers(g, x, 95.0);
  const auto n = oc::count_outliers(f.flags);
  CHECK(n >= 22);
  CHECK(n <= 23);
  const Matrix at_mean = g.means.select_rows(std::vector<std::size_t>{0});
  CHECK(log_density(g, at_mean)[0] > f.threshold);
  CHECK(code_of([&] { fit_gmm(Matrix{{1.0}}, 2, CovarianceType::Full, 0); }) == Errc::TooFewRows);
  CHECK(parse_covariance_type("tied") == CovarianceType::Tied);
  CHECK(fit_gmm(x, 3, CovarianceType::Diag, 1) == g);
}
