#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "zcam/matrix.hpp"

namespace zcam::ml {

enum class SplitMode : std::uint8_t { Best, Random };

struct TreeParams {
  std::optional<std::size_t> max_depth;  // nullopt: grow until pure
  std::size_t min_leaf = 1;
  std::size_t max_features = 0;  // candidate features per node; 0 means all
  SplitMode mode = SplitMode::Best;
  std::uint64_t seed = 0;
};

/// Axis-aligned binary tree stored as a flat node array. Leaves carry a value
/// vector: a class-weight histogram for classification trees, or a single
/// regression value.
class DecisionTree {
 public:
  struct Node {
    std::int32_t feature = -1;  // -1 for leaves
    double threshold = 0.0;     // go left when x[feature] <= threshold
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t value_offset = 0;
    double weight = 0.0;        // training weight reaching the node
    bool operator==(const Node&) const = default;
  };

  DecisionTree() = default;
  DecisionTree(std::size_t n_features, std::size_t n_outputs)
      : n_features_(n_features), n_outputs_(n_outputs) {}

  std::size_t apply(std::span<const double> x) const noexcept;
  std::span<const double> value(std::size_t node) const noexcept {
    return {values_.data() + nodes_[node].value_offset, n_outputs_};
  }
  std::span<double> value(std::size_t node) noexcept {
    return {values_.data() + nodes_[node].value_offset, n_outputs_};
  }
  std::span<const double> predict(std::span<const double> x) const noexcept { return value(apply(x)); }

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t n_features() const noexcept { return n_features_; }
  std::size_t n_outputs() const noexcept { return n_outputs_; }
  std::size_t depth() const;
  bool is_leaf(std::size_t node) const noexcept { return nodes_[node].feature < 0; }

  /// Weighted impurity decrease accumulated per feature during training (unnormalized).
  const std::vector<double>& impurity_decrease() const noexcept { return decrease_; }

  // Construction and persistence access.
  std::int32_t add_node(const Node& n, std::span<const double> value);
  std::vector<Node>& mutable_nodes() noexcept { return nodes_; }
  std::vector<double>& mutable_values() noexcept { return values_; }
  std::vector<double>& mutable_decrease() noexcept { return decrease_; }

  bool operator==(const DecisionTree&) const = default;

 private:
  std::size_t n_features_ = 0;
  std::size_t n_outputs_ = 0;
  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<double> decrease_;
};

/// Per-feature row order sorted by (value, row). Reusable across trees built on the same matrix.
class SortedColumns {
 public:
  explicit SortedColumns(const Matrix& x);
  std::span<const std::uint32_t> order(std::size_t feature) const { return order_[feature]; }
  std::size_t features() const noexcept { return order_.size(); }

 private:
  std::vector<std::vector<std::uint32_t>> order_;
};

struct TreeInputs {
  const Matrix& x;
  std::span<const double> weights = {};           // empty: every row weight 1
  const SortedColumns* presorted = nullptr;
  std::span<const std::uint64_t> feature_keys = {};  // identities for column-independent randomness
};

/// Gini-impurity classification tree; leaves hold class-weight histograms.
DecisionTree build_classification_tree(const TreeInputs& in, std::span<const int> y, int n_classes,
                                       const TreeParams& params);

/// Squared-error regression tree; leaves hold the weighted target mean.
DecisionTree build_regression_tree(const TreeInputs& in, std::span<const double> target,
                                   const TreeParams& params);

}  // namespace zcam::ml
