#include "zcam/iforest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "zcam/error.hpp"
#include "zcam/rng.hpp"
#include "zcam/threshold.hpp"

namespace zcam::oc {

double harmonic(std::size_t i) {
  static const std::vector<double> table = [] {
    std::vector<double> t(4097, 0.0);
    for (std::size_t k = 1; k < t.size(); ++k) {
      double h = 0.0;
      for (std::size_t j = k; j >= 1; --j) h += 1.0 / static_cast<double>(j);
      t[k] = h;
    }
    return t;
  }();
  if (i < table.size()) return table[i];
  if (i <= 1'000'000) {
    // Summed from the small end for accuracy.
    double h = 0.0;
    for (std::size_t k = i; k >= 1; --k) h += 1.0 / static_cast<double>(k);
    return h;
  }
  const double n = static_cast<double>(i);
  return std::log(n) + 0.57721566490153286 + 1.0 / (2.0 * n) - 1.0 / (12.0 * n * n);
}

double average_path_length(std::size_t m) {
  if (m <= 1) return 0.0;
  const double mm = static_cast<double>(m);
  return 2.0 * harmonic(m - 1) - 2.0 * (mm - 1.0) / mm;
}

double score_from_path(double mean_path, std::size_t psi) {
  const double c = average_path_length(psi);
  if (c <= 0.0) return 0.5;
  return std::exp2(-mean_path / c);
}

double IsolationTree::path_length(std::span<const double> x, std::size_t height_limit) const {
  std::size_t node = 0, depth = 0;
  while (nodes[node].feature >= 0 && depth < height_limit) {
    const auto& nd = nodes[node];
    node = static_cast<std::size_t>(x[static_cast<std::size_t>(nd.feature)] < nd.threshold ? nd.left
                                                                                              : nd.right);
    ++depth;
  }
  return static_cast<double>(depth) + average_path_length(nodes[node].size);
}

std::size_t IsolationTree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

namespace {

IsolationTree build_tree(const Matrix& x, std::vector<std::size_t> rows, std::size_t height_limit,
                         Rng& rng) {
  IsolationTree tree;
  struct Task {
    std::size_t node, begin, end, depth;
  };
  tree.nodes.push_back({});
  std::vector<Task> stack{{0, 0, rows.size(), 0}};
  std::vector<std::size_t> candidates;
  std::vector<double> lo(x.cols()), hi(x.cols());
  while (!stack.empty()) {
    const Task t = stack.back();
    stack.pop_back();
    const std::size_t count = t.end - t.begin;
    tree.nodes[t.node].size = static_cast<std::uint32_t>(count);
    if (t.depth >= height_limit || count <= 1) continue;

    candidates.clear();
    for (std::size_t c = 0; c < x.cols(); ++c) {
      double mn = x(rows[t.begin], c), mx = mn;
      for (std::size_t k = t.begin + 1; k < t.end; ++k) {
        mn = std::min(mn, x(rows[k], c));
        mx = std::max(mx, x(rows[k], c));
      }
      lo[c] = mn;
      hi[c] = mx;
      if (mx > mn) candidates.push_back(c);
    }
    if (candidates.empty()) continue;  // all rows identical: external node

    const std::size_t f = candidates[rng.below(candidates.size())];
    double thr = rng.uniform(lo[f], hi[f]);
    if (thr <= lo[f]) thr = std::nextafter(lo[f], hi[f]);
    const auto mid = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(t.begin),
                                    rows.begin() + static_cast<std::ptrdiff_t>(t.end),
                                    [&](std::size_t r) { return x(r, f) < thr; });
    const std::size_t split = static_cast<std::size_t>(mid - rows.begin());

    const auto left = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes.push_back({});
    auto& nd = tree.nodes[t.node];
    nd.feature = static_cast<std::int32_t>(f);
    nd.threshold = thr;
    nd.left = left;
    nd.right = left + 1;
    stack.push_back({static_cast<std::size_t>(left) + 1, split, t.end, t.depth + 1});
    stack.push_back({static_cast<std::size_t>(left), t.begin, split, t.depth + 1});
  }
  return tree;
}

}  // namespace

IsolationForestModel train_isolation_forest(const Matrix& x, const IsolationForestParams& p) {
  if (x.rows() == 0 || x.cols() == 0) fail(Errc::EmptyData, "no training rows");
  if (x.rows() < 2) fail(Errc::EmptyData, "isolation forest needs at least two rows");
  if (p.n_trees == 0) fail(Errc::InvalidArgument, "n_trees must be positive");
  if (!(p.contamination >= 0.0 && p.contamination < 1.0))
    fail(Errc::InvalidArgument, "contamination must lie in [0, 1)");

  IsolationForestModel m;
  m.n_train = x.rows();
  m.n_features = x.cols();
  m.psi = std::min(std::max<std::size_t>(p.max_samples, 2), x.rows());
  m.height_limit = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(m.psi))));
  m.contamination = p.contamination;
  m.trees.resize(p.n_trees);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(p.n_trees); ++t) {
    Rng rng(mix_seed(p.seed, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> all(x.rows());
    std::iota(all.begin(), all.end(), 0);
    // Partial Fisher-Yates: the first psi entries form the subsample.
    for (std::size_t i = 0; i < m.psi; ++i) std::swap(all[i], all[i + rng.below(all.size() - i)]);
    all.resize(m.psi);
    m.trees[static_cast<std::size_t>(t)] = build_tree(x, std::move(all), m.height_limit, rng);
  }

  const auto scores = isolation_scores(m, x);
  m.threshold = calibrate_threshold(scores, 100.0 * (1.0 - p.contamination));
  return m;
}

double mean_path_length(const IsolationForestModel& m, std::span<const double> x) {
  if (x.size() != m.n_features) fail(Errc::WidthMismatch, "query width differs from the model");
  double total = 0.0;
  for (const auto& t : m.trees) total += t.path_length(x, m.height_limit);
  return total / static_cast<double>(m.trees.size());
}

double isolation_score(const IsolationForestModel& m, std::span<const double> x) {
  return score_from_path(mean_path_length(m, x), m.psi);
}

std::vector<double> isolation_scores(const IsolationForestModel& m, const Matrix& x) {
  if (x.cols() != m.n_features) fail(Errc::WidthMismatch, "query width differs from the model");
  std::vector<double> out(x.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(x.rows()); ++i)
    out[static_cast<std::size_t>(i)] = isolation_score(m, x.row(static_cast<std::size_t>(i)));
  return out;
}

}  // namespace zcam::oc
