#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "zcam/matrix.hpp"
#include "zcam/pca.hpp"

namespace zcam::decomp {

enum class CovarianceType { Spherical, Tied, Diag, Full };
inline constexpr CovarianceType kAllCovarianceTypes[] = {CovarianceType::Spherical, CovarianceType::Tied,
                                                         CovarianceType::Diag, CovarianceType::Full};
std::string_view covariance_name(CovarianceType t);
CovarianceType parse_covariance_type(std::string_view name);

struct GmmParams {
  std::size_t max_iter = 200;
  double tol = 1e-4;               // per-row log-likelihood gain
  double covariance_floor = 1e-6;  // lower bound on covariance eigenvalues
  std::size_t kmeans_iter = 100;
  std::size_t n_init = 1;
};

struct GmmModel {
  CovarianceType type = CovarianceType::Full;
  std::vector<double> weights;
  Matrix means;                    // K x d
  std::vector<Matrix> covariances; // K matrices d x d (identical for tied; diagonal for diag/spherical)
  double log_likelihood = 0.0;     // total over the training rows
  std::vector<double> log_likelihood_history;
  std::size_t iterations = 0;
  bool converged = false;

  std::size_t components() const { return weights.size(); }
  std::size_t dim() const { return means.cols(); }
  bool operator==(const GmmModel&) const = default;
};

GmmModel fit_gmm(const Matrix& x, std::size_t k, CovarianceType type, std::uint64_t seed,
                 const GmmParams& params = {});

/// Per-row mixture log-density.
std::vector<double> log_density(const GmmModel& m, const Matrix& x);
/// Posterior component probabilities, n x K.
Matrix responsibilities(const GmmModel& m, const Matrix& x);

std::size_t free_parameters(std::size_t k, std::size_t d, CovarianceType type);
double bic(const GmmModel& m, std::size_t n_rows);

struct BicEntry {
  std::size_t k = 0;
  CovarianceType type = CovarianceType::Full;
  double bic = 0.0;
};
struct BicSweepResult {
  std::vector<BicEntry> grid;
  std::size_t best = 0;
  const BicEntry& argmin() const { return grid[best]; }
};

BicSweepResult bic_sweep(const Matrix& x, std::size_t k_max, std::uint64_t seed, const GmmParams& params = {});

/// Flags the rows whose log-density falls below the (100 - percentile) quantile.
OutlierFlags gmm_outliers(const GmmModel& m, const Matrix& x, double percentile);

}  // namespace zcam::decomp
