#pragma once

#include <span>
#include <vector>

#include "zcam/matrix.hpp"

namespace zcam::ml {

struct KnnModel {
  Matrix x;
  std::vector<int> y;
  int n_classes = 0;
  std::size_t k = 5;

  bool operator==(const KnnModel&) const = default;
};

KnnModel train_knn(const Matrix& x, std::span<const int> y, int n_classes, std::size_t k = 5);

/// Vote fractions among the k nearest training rows (Euclidean; equal
/// distances resolved by lower training index).
Matrix predict_proba(const KnnModel& model, const Matrix& q);

}  // namespace zcam::ml
