#pragma once

#include <cstddef>

#include "zcam/gmm.hpp"

namespace zcam::decomp {

struct DecompParams {
  std::size_t pca_components = 2;
  double percentile = 95.0;
  std::size_t gmm_components = 9;
  CovarianceType gmm_covariance = CovarianceType::Diag;
  std::size_t bic_k_max = 20;
  GmmParams gmm;
};

}  // namespace zcam::decomp
