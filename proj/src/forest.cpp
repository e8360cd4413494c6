#include "zcam/forest.hpp"

#include <cmath>
#include <numeric>

#include "zcam/error.hpp"
#include "zcam/rng.hpp"

namespace zcam::ml {

ForestModel train_forest(const Matrix& x, std::span<const int> y, int n_classes, const ForestParams& params,
                         std::span<const std::uint64_t> feature_keys) {
  if (x.rows() < 2) fail(Errc::EmptyData, "forest needs at least 2 rows");
  if (params.n_trees < 1) fail(Errc::InvalidArgument, "forest needs at least one tree");
  ForestModel m;
  m.kind = params.kind;
  m.n_classes = n_classes;
  m.seed = params.seed;
  m.n_features_per_split =
      params.max_features ? params.max_features
                          : std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(double(x.cols()))));
  m.trees.resize(params.n_trees);

  const SortedColumns sorted(x);
  const auto n_trees = static_cast<std::ptrdiff_t>(params.n_trees);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < n_trees; ++t) {
    const std::uint64_t tree_seed = mix_seed(params.seed, static_cast<std::uint64_t>(t));
    std::vector<double> weights;
    if (params.kind == ForestKind::Bagged) {
      weights.assign(x.rows(), 0.0);
      Rng rng(tree_seed);
      for (std::size_t i = 0; i < x.rows(); ++i) weights[rng.below(x.rows())] += 1.0;
    }
    TreeParams tp;
    tp.max_depth = params.max_depth;
    tp.min_leaf = params.min_leaf;
    tp.max_features = m.n_features_per_split;
    tp.mode = params.kind == ForestKind::Extra ? SplitMode::Random : SplitMode::Best;
    tp.seed = tree_seed;
    m.trees[static_cast<std::size_t>(t)] =
        build_classification_tree({x, weights, &sorted, feature_keys}, y, n_classes, tp);
  }
  return m;
}

Matrix predict_proba(const ForestModel& model, const Matrix& x) {
  if (model.trees.empty() || x.cols() != model.trees.front().n_features())
    fail(Errc::DimensionMismatch, "forest input width");
  Matrix out(x.rows(), static_cast<std::size_t>(model.n_classes));
  const auto n = static_cast<std::ptrdiff_t>(x.rows());
  const double inv_trees = 1.0 / static_cast<double>(model.trees.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto row = out.row(static_cast<std::size_t>(i));
    for (const auto& tree : model.trees) {
      const auto hist = tree.predict(x.row(static_cast<std::size_t>(i)));
      const double total = std::accumulate(hist.begin(), hist.end(), 0.0);
      if (total <= 0) continue;
      for (std::size_t k = 0; k < row.size(); ++k) row[k] += hist[k] / total * inv_trees;
    }
  }
  return out;
}

std::vector<double> feature_importances(const ForestModel& model) {
  if (model.trees.empty()) return {};
  std::vector<double> imp(model.trees.front().n_features(), 0.0);
  for (const auto& tree : model.trees) {
    const auto& dec = tree.impurity_decrease();
    const double total = std::accumulate(dec.begin(), dec.end(), 0.0);
    if (total <= 0) continue;
    for (std::size_t f = 0; f < imp.size(); ++f) imp[f] += dec[f] / total;
  }
  const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
  if (total > 0)
    for (double& v : imp) v /= total;
  return imp;
}

}  // namespace zcam::ml
