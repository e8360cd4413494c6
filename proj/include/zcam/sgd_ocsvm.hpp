#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "zcam/matrix.hpp"

namespace zcam::oc {

/// Random Fourier features approximating exp(-gamma |x - y|^2):
/// phi(x) = sqrt(2/D) cos(W x + b), W ~ N(0, 2 gamma), b ~ U(0, 2 pi).
struct FourierMap {
  Matrix w;                     // D x d
  std::vector<double> offset;   // D
  double gamma = 0.0;
  std::uint64_t seed = 0;

  std::size_t input_dim() const { return w.cols(); }
  std::size_t components() const { return w.rows(); }
  Matrix transform(const Matrix& x) const;

  bool operator==(const FourierMap&) const = default;
};

FourierMap make_fourier_map(std::size_t input_dim, std::size_t components, double gamma,
                            std::uint64_t seed);

struct SgdOcsvmParams {
  double nu = 0.03;
  double eta0 = 1e-4;
  std::size_t epochs = 30;
  double gamma = 0.0;            // 0: 1 / (d * mean column variance)
  std::size_t components = 512;
  std::uint64_t seed = 0;
};

struct SgdOcsvmModel {
  FourierMap map;
  std::vector<double> w;
  double rho = 0.0;
  double nu = 0.03;
  double eta0 = 1e-4;
  std::vector<double> epoch_objective;  // mean per-sample objective seen during each epoch

  bool operator==(const SgdOcsvmModel&) const = default;
};

SgdOcsvmModel train_sgd_ocsvm(const Matrix& x, const SgdOcsvmParams& params = {});

/// w . phi(x) - rho; negative means outlier.
std::vector<double> decision_function(const SgdOcsvmModel& m, const Matrix& x);

}  // namespace zcam::oc
