#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "zcam/matrix.hpp"

namespace zcam::oc {

/// Exact harmonic number H(i) = 1 + 1/2 + ... + 1/i (asymptotic series past 10^6).
double harmonic(std::size_t i);
/// Average unsuccessful-search path length in a BST of m nodes: 2H(m-1) - 2(m-1)/m.
double average_path_length(std::size_t m);
/// s = 2^(-mean_path / c(psi)).
double score_from_path(double mean_path, std::size_t psi);

struct IsolationTree {
  struct Node {
    std::int32_t feature = -1;  // -1 marks an external node
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t size = 0;     // training rows reaching the node
    bool operator==(const Node&) const = default;
  };
  std::vector<Node> nodes;

  /// Depth of the external node reached plus c(size), with depth capped at `height_limit`.
  double path_length(std::span<const double> x, std::size_t height_limit) const;
  std::size_t depth() const;
  bool operator==(const IsolationTree&) const = default;
};

struct IsolationForestParams {
  std::size_t n_trees = 100;
  std::size_t max_samples = 256;
  double contamination = 0.1;
  std::uint64_t seed = 0;
};

struct IsolationForestModel {
  std::vector<IsolationTree> trees;
  std::size_t psi = 0;
  std::size_t n_train = 0;
  std::size_t n_features = 0;
  std::size_t height_limit = 0;
  double contamination = 0.1;
  double threshold = 0.0;  // score above which a row is an outlier

  bool operator==(const IsolationForestModel&) const = default;
};

IsolationForestModel train_isolation_forest(const Matrix& x, const IsolationForestParams& params = {});

double mean_path_length(const IsolationForestModel& m, std::span<const double> x);
double isolation_score(const IsolationForestModel& m, std::span<const double> x);
std::vector<double> isolation_scores(const IsolationForestModel& m, const Matrix& x);

}  // namespace zcam::oc
