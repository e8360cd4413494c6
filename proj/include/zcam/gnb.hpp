#pragma once

#include <span>
#include <vector>

#include "zcam/matrix.hpp"

namespace zcam::ml {

struct GnbModel {
  std::vector<double> log_prior;  // per class
  Matrix means;                   // classes x features
  Matrix variances;               // classes x features, floored
  double var_floor = 0.0;

  bool operator==(const GnbModel&) const = default;
};

/// Floor = `floor_ratio` times the largest per-feature variance of x.
GnbModel train_gnb(const Matrix& x, std::span<const int> y, int n_classes, double floor_ratio = 1e-9);

/// log p(class) + sum_j log N(x_j; mean, var), one column per class.
Matrix joint_log_likelihood(const GnbModel& model, const Matrix& x);
Matrix predict_proba(const GnbModel& model, const Matrix& x);

}  // namespace zcam::ml
