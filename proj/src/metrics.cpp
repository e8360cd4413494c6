#include "zcam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <set>

#include "zcam/error.hpp"

namespace zcam::eval {

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& r : counts) t += std::accumulate(r.begin(), r.end(), std::size_t{0});
  return t;
}

std::size_t ConfusionMatrix::correct() const {
  std::size_t t = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
  return t;
}

std::size_t ConfusionMatrix::index_of(const std::string& label) const {
  const auto it = std::lower_bound(labels.begin(), labels.end(), label);
  return (it != labels.end() && *it == label) ? static_cast<std::size_t>(it - labels.begin()) : labels.size();
}

ConfusionMatrix confusion(std::span<const std::string> truth, std::span<const std::string> predicted,
                          std::vector<std::string> labels) {
  if (truth.size() != predicted.size())
    fail(Errc::LengthMismatch, "truth has " + std::to_string(truth.size()) + " rows, predictions " +
                                   std::to_string(predicted.size()));
  ConfusionMatrix cm;
  std::set<std::string> all(labels.begin(), labels.end());
  all.insert(truth.begin(), truth.end());
  all.insert(predicted.begin(), predicted.end());
  cm.labels.assign(all.begin(), all.end());
  cm.counts.assign(cm.labels.size(), std::vector<std::size_t>(cm.labels.size(), 0));
  for (std::size_t i = 0; i < truth.size(); ++i) ++cm.counts[cm.index_of(truth[i])][cm.index_of(predicted[i])];
  return cm;
}

namespace {

double ratio(double num, double den, bool& flag) {
  if (den == 0.0) {
    flag = true;
    return 0.0;
  }
  return num / den;
}

}  // namespace

Metrics compute_metrics(std::span<const std::string> truth, std::span<const std::string> predicted,
                        const std::optional<std::string>& positive) {
  if (truth.empty()) fail(Errc::EmptyData, "no rows to evaluate");
  Metrics m;
  m.confusion = confusion(truth, predicted, positive ? std::vector<std::string>{*positive} : std::vector<std::string>{});
  const auto& cm = m.confusion;
  const std::size_t k = cm.labels.size();
  m.accuracy = static_cast<double>(cm.correct()) / static_cast<double>(cm.total());

  std::size_t present = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t tp = cm.counts[c][c], row = 0, col = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row += cm.counts[c][j];
      col += cm.counts[j][c];
    }
    ClassMetrics cls;
    cls.label = cm.labels[c];
    cls.support = row;
    cls.precision = ratio(static_cast<double>(tp), static_cast<double>(col), m.zero_division);
    cls.recall = ratio(static_cast<double>(tp), static_cast<double>(row), m.zero_division);
    cls.f1 = ratio(2.0 * cls.precision * cls.recall, cls.precision + cls.recall, m.zero_division);
    m.per_class.push_back(cls);
    if (row > 0) {
      // Macro averages run over classes present in the truth.
      ++present;
      m.macro_precision += cls.precision;
      m.macro_recall += cls.recall;
      m.macro_f1 += cls.f1;
    }
  }
  if (present > 0) {
    m.macro_precision /= static_cast<double>(present);
    m.macro_recall /= static_cast<double>(present);
    m.macro_f1 /= static_cast<double>(present);
  }

  if (positive) {
    m.positive = positive;
    const std::size_t p = cm.index_of(*positive);
    std::size_t tp = 0, fn = 0, fp = 0, tn = 0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        const std::size_t c = cm.counts[i][j];
        if (i == p) (j == p ? tp : fn) += c;
        else (j == p ? fp : tn) += c;
      }
    m.tpr = ratio(static_cast<double>(tp), static_cast<double>(tp + fn), m.zero_division);
    m.fpr = ratio(static_cast<double>(fp), static_cast<double>(fp + tn), m.zero_division);
  }
  return m;
}

Curves roc_pr_curves(std::span<const bool> positive, std::span<const double> scores) {
  if (positive.size() != scores.size())
    fail(Errc::LengthMismatch, "labels and scores differ in length");
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(scores[i])) fail(Errc::InvalidArgument, "non-finite score");
    n_pos += positive[i] ? 1 : 0;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) fail(Errc::SingleClass, "both classes are needed for ROC/PR curves");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  Curves c;
  const double inf = std::numeric_limits<double>::infinity();
  c.roc.push_back({0.0, 0.0, inf});
  c.pr.push_back({0.0, 1.0, inf});
  std::size_t tp = 0, fp = 0;
  double prev_fpr = 0.0, prev_tpr = 0.0, prev_recall = 0.0;
  for (std::size_t i = 0; i < n;) {
    const double thr = scores[order[i]];
    // Equal scores move together.
    for (; i < n && scores[order[i]] == thr; ++i) (positive[order[i]] ? tp : fp) += 1;
    const double tpr = static_cast<double>(tp) / static_cast<double>(n_pos);
    const double fpr = static_cast<double>(fp) / static_cast<double>(n_neg);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    c.roc.push_back({fpr, tpr, thr});
    c.pr.push_back({tpr, precision, thr});
    c.auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
    c.auprc += (tpr - prev_recall) * precision;
    prev_fpr = fpr;
    prev_tpr = tpr;
    prev_recall = tpr;
  }
  return c;
}

Curves roc_pr_curves(std::span<const std::string> truth, std::span<const double> scores,
                     const std::string& positive_label) {
  // std::vector<bool> has no contiguous storage.
  std::unique_ptr<bool[]> flags(new bool[truth.size()]);
  for (std::size_t i = 0; i < truth.size(); ++i) flags[i] = truth[i] == positive_label;
  return roc_pr_curves(std::span<const bool>(flags.get(), truth.size()), scores);
}

MisclassificationTable misclassification_table(const ConfusionMatrix& cm) {
  MisclassificationTable t;
  for (std::size_t i = 0; i < cm.labels.size(); ++i) {
    const std::size_t row = std::accumulate(cm.counts[i].begin(), cm.counts[i].end(), std::size_t{0});
    if (row == 0) continue;
    for (std::size_t j = 0; j < cm.labels.size(); ++j) {
      if (i == j || cm.counts[i][j] == 0) continue;
      t[cm.labels[i]][cm.labels[j]] = 100.0 * static_cast<double>(cm.counts[i][j]) / static_cast<double>(row);
    }
  }
  return t;
}

MeanStd mean_std(std::span<const double> v) {
  MeanStd r;
  if (v.empty()) return r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.stddev = std::sqrt(ss / static_cast<double>(v.size()));
  return r;
}

}  // namespace zcam::eval
