#pragma once

#include <vector>

#include "zcam/matrix.hpp"
#include "zcam/threshold.hpp"

namespace zcam::decomp {

struct PcaModel {
  std::vector<double> mean;
  Matrix components;                       // k x d, orthonormal rows
  std::vector<double> explained_variance;  // nonincreasing
  std::size_t iterations = 0;

  std::size_t k() const { return components.rows(); }
  bool operator==(const PcaModel&) const = default;
};

struct PcaParams {
  double tol = 1e-10;
  std::size_t max_iter = 5000;
};

PcaModel fit_pca(const Matrix& x, std::size_t k, const PcaParams& params = {});

Matrix transform(const PcaModel& m, const Matrix& x);
Matrix inverse_transform(const PcaModel& m, const Matrix& z);
std::vector<double> reconstruction_errors(const PcaModel& m, const Matrix& x);

struct OutlierFlags {
  std::vector<double> scores;  // per-row error (PCA) or log-density (GMM)
  double threshold = 0.0;
  std::vector<oc::Decision> flags;
};

/// Threshold at the given percentile of the calibration errors; flags rows above it.
OutlierFlags pca_outliers(const PcaModel& m, const Matrix& x, double percentile);

}  // namespace zcam::decomp
