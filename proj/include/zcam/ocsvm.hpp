#pragma once

#include <span>
#include <vector>

#include "zcam/matrix.hpp"

namespace zcam::oc {

struct OcsvmParams {
  double nu = 0.001;
  double gamma = 0.999;
  double tol = 1e-4;              // KKT gap at which the solver stops
  std::size_t max_iter = 0;       // 0: max(10'000'000, 100 n)
  std::size_t cache_mb = 256;     // kernel row cache
  std::size_t max_rows = 50'000;  // larger sets belong to the SGD variant
};

/// RBF one-class SVM: decision(x) = sum_i alpha_i K(sv_i, x) - rho, with
/// 0 <= alpha_i <= 1/(nu n) and sum alpha_i = 1.
struct OcsvmModel {
  Matrix support_vectors;
  std::vector<double> alpha;
  double rho = 0.0;
  double gamma = 0.999;
  double nu = 0.001;
  std::size_t n_train = 0;
  // Solver diagnostics (not needed for prediction).
  std::size_t iterations = 0;
  double kkt_gap = 0.0;
  double objective = 0.0;  // 1/2 alpha^T Q alpha at the solution

  bool operator==(const OcsvmModel&) const = default;
};

OcsvmModel train_ocsvm(const Matrix& x, const OcsvmParams& params = {});

double decision(const OcsvmModel& m, std::span<const double> x);
std::vector<double> decision_function(const OcsvmModel& m, const Matrix& x);

/// Full dual solution over the training rows (alpha for every row, zeros included).
struct OcsvmDual {
  std::vector<double> alpha;
  double rho = 0.0;
  double objective = 0.0;
  double kkt_gap = 0.0;
  std::size_t iterations = 0;
};
OcsvmDual solve_ocsvm_dual(const Matrix& x, const OcsvmParams& params);

}  // namespace zcam::oc
