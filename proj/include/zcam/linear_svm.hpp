#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "zcam/matrix.hpp"

namespace zcam::ml {

struct LinearSvmParams {
  double l2 = 1e-4;
  std::size_t epochs = 1000;
  double learning_rate = 0.01;  // decayed as lr / (1 + epoch)
  std::uint64_t seed = 0;
};

/// One-vs-rest linear SVM trained by SGD on the L2-regularized hinge loss.
struct LinearSvmModel {
  Matrix weights;             // classes x features
  std::vector<double> bias;   // per class
  std::vector<std::size_t> epochs_run;

  bool operator==(const LinearSvmModel&) const = default;
};

LinearSvmModel train_linear_svm(const Matrix& x, std::span<const int> y, int n_classes,
                                const LinearSvmParams& params = {});

/// w_k . x + b_k for every class.
Matrix margins(const LinearSvmModel& model, const Matrix& x);

/// Row-wise min-max normalized margins, rescaled to sum 1.
Matrix predict_proba(const LinearSvmModel& model, const Matrix& x);

}  // namespace zcam::ml
