#pragma once

#include <cstdint>
#include <vector>

#include "zcam/matrix.hpp"

namespace zcam::oc {

struct DeepSvddConfig {
  std::size_t input_dim = 10;
  std::vector<std::size_t> hidden{512, 512};
  std::size_t latent = 8;
  double learning_rate = 1e-4;
  std::size_t epochs = 150;
  std::size_t batch_size = 256;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double percentile = 95.0;
  double center_eps = 0.1;  // |c_j| below this is pushed out to +-center_eps
  bool soft_boundary = false;
  double nu = 0.1;          // soft-boundary only
  std::size_t warmup_epochs = 10;  // soft-boundary: epochs before the radius is updated
  std::uint64_t seed = 0;

  bool operator==(const DeepSvddConfig&) const = default;
};

/// Bias-free ReLU network; weights[l] is (fan_in x fan_out), no activation on the last layer.
struct DeepSvddModel {
  DeepSvddConfig config;
  std::vector<Matrix> weights;
  std::vector<double> center;
  double threshold = 0.0;   // squared distance above which a row is an outlier
  double radius_sq = 0.0;   // soft-boundary radius (0 in the plain mode)
  std::vector<double> epoch_loss;

  bool operator==(const DeepSvddModel&) const = default;
};

std::vector<Matrix> init_weights(const DeepSvddConfig& config);
Matrix forward(const std::vector<Matrix>& weights, const Matrix& x);

/// Running-mean of the network outputs, then the center guard.
std::vector<double> init_center(const std::vector<Matrix>& weights, const Matrix& x, double eps);

/// Mean squared distance to `center` over the rows of x. When `grad` is
/// non-null it receives d(loss)/d(weights), shaped like `weights`.
/// With radius_sq >= 0 the soft-boundary objective is used instead:
/// R^2 + 1/(nu n) sum max(0, d_i - R^2).
double svdd_loss(const std::vector<Matrix>& weights, const std::vector<double>& center, const Matrix& x,
                 std::vector<Matrix>* grad, double radius_sq = -1.0, double nu = 0.1);

DeepSvddModel train_deep_svdd(const Matrix& x, const DeepSvddConfig& config = {});

/// |f(x) - c|^2 per row.
std::vector<double> svdd_distances(const DeepSvddModel& m, const Matrix& x);

}  // namespace zcam::oc
