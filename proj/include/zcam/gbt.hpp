#pragma once

#include <optional>
#include <span>
#include <vector>

#include "zcam/tree.hpp"

namespace zcam::ml {

struct GbtParams {
  std::size_t n_rounds = 200;
  double learning_rate = 0.1;
  std::optional<std::size_t> max_depth = 6;
  std::size_t min_leaf = 1;
};

/// Multiclass gradient boosting on the multinomial deviance: one regression
/// tree per class per round, fitted to the negative gradient y - p, with
/// Newton-step leaf values.
struct GbtModel {
  int n_classes = 0;
  double learning_rate = 0.1;
  std::vector<double> init;                      // log class priors
  std::vector<std::vector<DecisionTree>> rounds;  // [round][class]
  std::vector<double> train_deviance;            // mean deviance after each round

  bool operator==(const GbtModel&) const = default;
};

GbtModel train_gbt(const Matrix& x, std::span<const int> y, int n_classes, const GbtParams& params);

/// Raw additive scores F(x), one column per class.
Matrix decision_function(const GbtModel& model, const Matrix& x);
Matrix predict_proba(const GbtModel& model, const Matrix& x);

/// Mean multinomial deviance -1/n sum log p(y_i | x_i).
double deviance(const Matrix& proba, std::span<const int> y);

}  // namespace zcam::ml
