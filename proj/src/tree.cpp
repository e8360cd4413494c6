#include "zcam/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "zcam/error.hpp"
#include "zcam/rng.hpp"

namespace zcam::ml {

std::size_t DecisionTree::apply(std::span<const double> x) const noexcept {
  std::size_t n = 0;
  while (nodes_[n].feature >= 0) {
    const Node& node = nodes_[n];
    n = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                                : node.right);
  }
  return n;
}

std::size_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].feature < 0) continue;
    for (auto c : {nodes_[i].left, nodes_[i].right}) {
      d[static_cast<std::size_t>(c)] = d[i] + 1;
      best = std::max(best, d[i] + 1);
    }
  }
  return best;
}

std::int32_t DecisionTree::add_node(const Node& n, std::span<const double> value) {
  Node copy = n;
  copy.value_offset = static_cast<std::uint32_t>(values_.size());
  values_.insert(values_.end(), value.begin(), value.end());
  nodes_.push_back(copy);
  return static_cast<std::int32_t>(nodes_.size() - 1);
}

SortedColumns::SortedColumns(const Matrix& x) : order_(x.cols()) {
  for (std::size_t f = 0; f < x.cols(); ++f) {
    auto& o = order_[f];
    o.resize(x.rows());
    std::iota(o.begin(), o.end(), 0u);
    std::stable_sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
  }
}

namespace {

// Split-quality bookkeeping for Gini impurity. The proxy sum_k c_k^2 / W is
// maximized over both children; impurity decrease is the proxy gain.
struct GiniCriterion {
  std::span<const int> y;
  int n_classes;

  struct Stats {
    std::vector<double> counts;
    double weight = 0.0;
    double sq = 0.0;  // sum of squared class weights
  };

  Stats empty() const { return {std::vector<double>(static_cast<std::size_t>(n_classes), 0.0), 0.0, 0.0}; }
  void add(Stats& s, std::uint32_t row, double w) const {
    double& c = s.counts[static_cast<std::size_t>(y[row])];
    s.sq += (c + w) * (c + w) - c * c;
    c += w;
    s.weight += w;
  }
  void sub(Stats& s, std::uint32_t row, double w) const {
    double& c = s.counts[static_cast<std::size_t>(y[row])];
    s.sq += (c - w) * (c - w) - c * c;
    c -= w;
    s.weight -= w;
  }
  static double proxy(const Stats& s) { return s.weight > 0 ? s.sq / s.weight : 0.0; }
  static bool pure(const Stats& s) {
    std::size_t nonzero = 0;
    for (double c : s.counts) nonzero += c > 0.0;
    return nonzero <= 1;
  }
  std::vector<double> leaf_value(const Stats& s) const { return s.counts; }
  std::size_t outputs() const { return static_cast<std::size_t>(n_classes); }
};

struct MseCriterion {
  std::span<const double> target;

  struct Stats {
    double weight = 0.0;
    double sum = 0.0;
    double sum_sq = 0.0;
  };

  Stats empty() const { return {}; }
  void add(Stats& s, std::uint32_t row, double w) const {
    s.weight += w;
    s.sum += w * target[row];
    s.sum_sq += w * target[row] * target[row];
  }
  void sub(Stats& s, std::uint32_t row, double w) const {
    s.weight -= w;
    s.sum -= w * target[row];
    s.sum_sq -= w * target[row] * target[row];
  }
  static double proxy(const Stats& s) { return s.weight > 0 ? s.sum * s.sum / s.weight : 0.0; }
  static bool pure(const Stats& s) {
    if (s.weight <= 0) return true;
    const double var = s.sum_sq / s.weight - (s.sum / s.weight) * (s.sum / s.weight);
    return var <= 1e-14 * std::max(1.0, s.sum_sq / s.weight);
  }
  std::vector<double> leaf_value(const Stats& s) const {
    return {s.weight > 0 ? s.sum / s.weight : 0.0};
  }
  std::size_t outputs() const { return 1; }
};

template <class Crit>
class Builder {
 public:
  Builder(const TreeInputs& in, Crit crit, const TreeParams& params)
      : x_(in.x), weights_(in.weights), keys_(in.feature_keys), crit_(std::move(crit)), params_(params) {
    const std::size_t d = x_.cols();
    if (!keys_.empty() && keys_.size() != d) fail(Errc::DimensionMismatch, "feature key count");
    if (!weights_.empty() && weights_.size() != x_.rows()) fail(Errc::DimensionMismatch, "weight count");
    cols_.resize(d);
    for (std::size_t f = 0; f < d; ++f) {
      auto& c = cols_[f];
      c.reserve(x_.rows());
      if (in.presorted) {
        for (auto r : in.presorted->order(f))
          if (weight(r) > 0) c.push_back(r);
      } else {
        for (std::uint32_t r = 0; r < x_.rows(); ++r)
          if (weight(r) > 0) c.push_back(r);
        std::stable_sort(c.begin(), c.end(), [&](std::uint32_t a, std::uint32_t b) { return x_(a, f) < x_(b, f); });
      }
    }
    if (d == 0 || cols_[0].empty()) fail(Errc::EmptyData, "no weighted training rows");
    goes_left_.assign(x_.rows(), 0);
    scratch_.resize(cols_[0].size());
    max_features_ = params.max_features == 0 ? d : std::min(params.max_features, d);
    ordered_ = keys_.empty() && params.mode == SplitMode::Best && max_features_ == d;
  }

  DecisionTree build() {
    DecisionTree tree(x_.cols(), crit_.outputs());
    tree.mutable_decrease().assign(x_.cols(), 0.0);
    struct Task {
      std::size_t begin, end, depth;
      std::uint64_t id;
      std::int32_t parent;
      bool is_left;
    };
    std::vector<Task> stack{{0, cols_[0].size(), 0, splitmix64(params_.seed), -1, false}};
    while (!stack.empty()) {
      const Task t = stack.back();
      stack.pop_back();
      typename Crit::Stats node = crit_.empty();
      for (std::size_t i = t.begin; i < t.end; ++i) crit_.add(node, cols_[0][i], weight(cols_[0][i]));

      DecisionTree::Node n;
      n.weight = node.weight;
      Split s;
      const bool can_split = (!params_.max_depth || t.depth < *params_.max_depth) &&
                             t.end - t.begin >= 2 * params_.min_leaf && !Crit::pure(node);
      if (can_split) s = find_split(t.begin, t.end, t.id, node);
      std::int32_t idx;
      if (s.feature < 0) {
        idx = tree.add_node(n, crit_.leaf_value(node));
      } else {
        n.feature = static_cast<std::int32_t>(s.feature);
        n.threshold = s.threshold;
        idx = tree.add_node(n, crit_.leaf_value(node));
        tree.mutable_decrease()[s.feature] += s.proxy - Crit::proxy(node);
      }
      if (t.parent >= 0) {
        auto& p = tree.mutable_nodes()[static_cast<std::size_t>(t.parent)];
        (t.is_left ? p.left : p.right) = idx;
      }
      if (s.feature < 0) continue;
      const std::size_t mid = partition(t.begin, t.end, static_cast<std::size_t>(s.feature), s.threshold);
      // Right pushed first so the left subtree is laid out first.
      stack.push_back({mid, t.end, t.depth + 1, mix_seed(t.id, 2), idx, false});
      stack.push_back({t.begin, mid, t.depth + 1, mix_seed(t.id, 1), idx, true});
    }
    return tree;
  }

 private:
  struct Split {
    std::int64_t feature = -1;
    double threshold = 0.0;
    double proxy = -1.0;
    std::uint64_t key = 0;
  };

  double weight(std::uint32_t r) const { return weights_.empty() ? 1.0 : weights_[r]; }
  std::uint64_t key(std::size_t f) const { return keys_.empty() ? f : keys_[f]; }

  void consider(Split& best, std::size_t f, double threshold, double proxy) const {
    const std::uint64_t k = key(f);
    if (best.feature < 0 || proxy > best.proxy || (proxy == best.proxy && k < best.key))
      best = {static_cast<std::int64_t>(f), threshold, proxy, k};
  }

  Split find_split(std::size_t begin, std::size_t end, std::uint64_t node_id,
                   const typename Crit::Stats& node) const {
    const std::size_t d = x_.cols();
    std::vector<std::size_t> candidates(d);
    std::iota(candidates.begin(), candidates.end(), 0);
    if (!ordered_) {
      std::vector<std::uint64_t> prio(d);
      for (std::size_t f = 0; f < d; ++f) prio[f] = mix_seed(node_id, key(f));
      std::sort(candidates.begin(), candidates.end(),
                [&](std::size_t a, std::size_t b) { return prio[a] != prio[b] ? prio[a] < prio[b] : a < b; });
    }
    Split best;
    std::size_t evaluated = 0;
    for (std::size_t f : candidates) {
      if (evaluated >= max_features_) break;
      const auto& col = cols_[f];
      const double lo = x_(col[begin], f), hi = x_(col[end - 1], f);
      if (!(lo < hi)) continue;  // constant within the node
      ++evaluated;
      if (params_.mode == SplitMode::Best)
        scan_best(best, f, begin, end, node);
      else
        eval_random(best, f, begin, end, node_id, lo, hi);
    }
    return best;
  }

  void scan_best(Split& best, std::size_t f, std::size_t begin, std::size_t end,
                 const typename Crit::Stats& node) const {
    const auto& col = cols_[f];
    typename Crit::Stats left = crit_.empty(), right = node;
    for (std::size_t i = begin; i + 1 < end; ++i) {
      const std::uint32_t r = col[i];
      const double w = weight(r);
      crit_.add(left, r, w);
      crit_.sub(right, r, w);
      const double v = x_(r, f), next = x_(col[i + 1], f);
      if (!(v < next)) continue;
      const std::size_t n_left = i + 1 - begin, n_right = end - i - 1;
      if (n_left < params_.min_leaf || n_right < params_.min_leaf) continue;
      double thr = v + (next - v) / 2.0;
      if (!(thr < next)) thr = v;
      consider(best, f, thr, Crit::proxy(left) + Crit::proxy(right));
    }
  }

  void eval_random(Split& best, std::size_t f, std::size_t begin, std::size_t end, std::uint64_t node_id,
                   double lo, double hi) const {
    const double u = unit_from_bits(mix_seed(mix_seed(node_id, 0x7468726573686f6cULL), key(f)));
    double thr = lo + u * (hi - lo);
    if (!(thr < hi)) thr = lo;
    const auto& col = cols_[f];
    typename Crit::Stats left = crit_.empty(), right = crit_.empty();
    std::size_t n_left = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint32_t r = col[i];
      if (x_(r, f) <= thr) {
        crit_.add(left, r, weight(r));
        ++n_left;
      } else {
        crit_.add(right, r, weight(r));
      }
    }
    if (n_left < params_.min_leaf || end - begin - n_left < params_.min_leaf) return;
    consider(best, f, thr, Crit::proxy(left) + Crit::proxy(right));
  }

  std::size_t partition(std::size_t begin, std::size_t end, std::size_t feature, double threshold) {
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint32_t r = cols_[feature][i];
      goes_left_[r] = x_(r, feature) <= threshold;
    }
    std::size_t mid = begin;
    for (auto& col : cols_) {
      std::size_t l = begin, rcount = 0;
      for (std::size_t i = begin; i < end; ++i) {
        const std::uint32_t r = col[i];
        if (goes_left_[r])
          col[l++] = r;
        else
          scratch_[rcount++] = r;
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(rcount), col.begin() + static_cast<std::ptrdiff_t>(l));
      mid = l;
    }
    return mid;
  }

  const Matrix& x_;
  std::span<const double> weights_;
  std::span<const std::uint64_t> keys_;
  Crit crit_;
  TreeParams params_;
  std::vector<std::vector<std::uint32_t>> cols_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::uint32_t> scratch_;
  std::size_t max_features_ = 0;
  bool ordered_ = true;
};

}  // namespace

DecisionTree build_classification_tree(const TreeInputs& in, std::span<const int> y, int n_classes,
                                       const TreeParams& params) {
  if (in.x.rows() == 0) fail(Errc::EmptyData, "empty training matrix");
  if (y.size() != in.x.rows()) fail(Errc::DimensionMismatch, "label count differs from row count");
  if (n_classes < 1) fail(Errc::InvalidArgument, "n_classes must be positive");
  for (int c : y)
    if (c < 0 || c >= n_classes) fail(Errc::InvalidArgument, "class index out of range");
  return Builder<GiniCriterion>(in, GiniCriterion{y, n_classes}, params).build();
}

DecisionTree build_regression_tree(const TreeInputs& in, std::span<const double> target,
                                   const TreeParams& params) {
  if (in.x.rows() == 0) fail(Errc::EmptyData, "empty training matrix");
  if (target.size() != in.x.rows()) fail(Errc::DimensionMismatch, "target count differs from row count");
  return Builder<MseCriterion>(in, MseCriterion{target}, params).build();
}

}  // namespace zcam::ml
