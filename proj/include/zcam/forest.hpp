#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "zcam/tree.hpp"

namespace zcam::ml {

enum class ForestKind : std::uint8_t { Bagged, Extra };

struct ForestParams {
  ForestKind kind = ForestKind::Bagged;
  std::size_t n_trees = 100;
  std::optional<std::size_t> max_depth;
  std::size_t min_leaf = 1;
  std::size_t max_features = 0;  // 0: floor(sqrt(d))
  std::uint64_t seed = 0;
};

struct ForestModel {
  ForestKind kind = ForestKind::Bagged;
  int n_classes = 0;
  std::size_t n_features_per_split = 0;
  std::uint64_t seed = 0;
  std::vector<DecisionTree> trees;

  bool operator==(const ForestModel&) const = default;
};

/// Bagged: bootstrap rows, best split over a random feature subset.
/// Extra: all rows, one uniform random threshold per candidate feature.
/// Trees are built in parallel; each tree's randomness depends only on (seed, tree index)
/// and, when given, the per-feature keys.
ForestModel train_forest(const Matrix& x, std::span<const int> y, int n_classes, const ForestParams& params,
                         std::span<const std::uint64_t> feature_keys = {});

/// Mean of the trees' normalized leaf histograms.
Matrix predict_proba(const ForestModel& model, const Matrix& x);

/// Mean impurity decrease per feature, normalized to sum 1.
std::vector<double> feature_importances(const ForestModel& model);

}  // namespace zcam::ml
