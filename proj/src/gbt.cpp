#include "zcam/gbt.hpp"

#include <algorithm>
#include <cmath>

#include "zcam/error.hpp"

namespace zcam::ml {
namespace {

void softmax_rows(Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    const double mx = *std::max_element(r.begin(), r.end());
    double s = 0.0;
    for (double& v : r) s += (v = std::exp(v - mx));
    for (double& v : r) v /= s;
  }
}

}  // namespace

double deviance(const Matrix& proba, std::span<const int> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    s -= std::log(std::max(proba(i, static_cast<std::size_t>(y[i])), 1e-300));
  return y.empty() ? 0.0 : s / static_cast<double>(y.size());
}

GbtModel train_gbt(const Matrix& x, std::span<const int> y, int n_classes, const GbtParams& params) {
  if (x.rows() == 0) fail(Errc::EmptyData, "empty training matrix");
  if (y.size() != x.rows()) fail(Errc::DimensionMismatch, "label count differs from row count");
  if (n_classes < 2) fail(Errc::SingleClass, "gradient boosting needs at least 2 classes");
  const std::size_t n = x.rows(), k_count = static_cast<std::size_t>(n_classes);

  GbtModel m;
  m.n_classes = n_classes;
  m.learning_rate = params.learning_rate;
  std::vector<double> counts(k_count, 0.0);
  for (int c : y) counts[static_cast<std::size_t>(c)] += 1.0;
  for (double c : counts) m.init.push_back(std::log(std::max(c, 1e-12) / static_cast<double>(n)));

  Matrix scores(n, k_count);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < k_count; ++k) scores(i, k) = m.init[k];

  const SortedColumns sorted(x);
  TreeParams tp;
  tp.max_depth = params.max_depth;
  tp.min_leaf = params.min_leaf;
  const double kf = static_cast<double>(k_count);

  for (std::size_t round = 0; round < params.n_rounds; ++round) {
    Matrix proba = scores;
    softmax_rows(proba);
    std::vector<DecisionTree> trees(k_count);
    const auto kk = static_cast<std::ptrdiff_t>(k_count);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t ks = 0; ks < kk; ++ks) {
      const auto k = static_cast<std::size_t>(ks);
      std::vector<double> residual(n);
      for (std::size_t i = 0; i < n; ++i)
        residual[i] = (static_cast<std::size_t>(y[i]) == k ? 1.0 : 0.0) - proba(i, k);
      DecisionTree tree = build_regression_tree({x, {}, &sorted, {}}, residual, tp);
      // Newton step per leaf: (K-1)/K * sum r / sum |r|(1-|r|).
      std::vector<double> num(tree.nodes().size(), 0.0), den(tree.nodes().size(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t leaf = tree.apply(x.row(i));
        const double r = residual[i];
        num[leaf] += r;
        den[leaf] += std::fabs(r) * (1.0 - std::fabs(r));
      }
      for (std::size_t node = 0; node < tree.nodes().size(); ++node) {
        if (!tree.is_leaf(node)) continue;
        tree.value(node)[0] = den[node] < 1e-150 ? 0.0 : (kf - 1.0) / kf * num[node] / den[node];
      }
      trees[k] = std::move(tree);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < k_count; ++k)
        scores(i, k) += params.learning_rate * trees[k].predict(x.row(i))[0];
    m.rounds.push_back(std::move(trees));
    Matrix p = scores;
    softmax_rows(p);
    m.train_deviance.push_back(deviance(p, y));
  }
  return m;
}

Matrix decision_function(const GbtModel& model, const Matrix& x) {
  const std::size_t k_count = static_cast<std::size_t>(model.n_classes);
  if (!model.rounds.empty() && x.cols() != model.rounds.front().front().n_features())
    fail(Errc::DimensionMismatch, "gbt input width");
  Matrix scores(x.rows(), k_count);
  const auto n = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t is = 0; is < n; ++is) {
    const auto i = static_cast<std::size_t>(is);
    for (std::size_t k = 0; k < k_count; ++k) {
      double s = model.init[k];
      for (const auto& round : model.rounds) s += model.learning_rate * round[k].predict(x.row(i))[0];
      scores(i, k) = s;
    }
  }
  return scores;
}

Matrix predict_proba(const GbtModel& model, const Matrix& x) {
  Matrix p = decision_function(model, x);
  softmax_rows(p);
  return p;
}

}  // namespace zcam::ml
