#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace zcam::eval {

struct ConfusionMatrix {
  std::vector<std::string> labels;               // sorted
  std::vector<std::vector<std::size_t>> counts;  // [truth][predicted]

  std::size_t total() const;
  std::size_t correct() const;
  std::size_t index_of(const std::string& label) const;  // labels.size() when absent
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Labels default to the sorted union of truth and predicted values.
ConfusionMatrix confusion(std::span<const std::string> truth, std::span<const std::string> predicted,
                          std::vector<std::string> labels = {});

struct ClassMetrics {
  std::string label;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  std::size_t support = 0;
};

struct Metrics {
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
  std::optional<std::string> positive;
  double tpr = 0.0, fpr = 0.0;
  bool zero_division = false;  // some ratio had an empty denominator and was set to 0
  ConfusionMatrix confusion;
};

Metrics compute_metrics(std::span<const std::string> truth, std::span<const std::string> predicted,
                        const std::optional<std::string>& positive = std::nullopt);

struct CurvePoint {
  double x = 0.0, y = 0.0;
  double threshold = 0.0;
};

struct Curves {
  std::vector<CurvePoint> roc;  // (fpr, tpr), from (0,0) to (1,1)
  double auc = 0.0;
  std::vector<CurvePoint> pr;   // (recall, precision)
  double auprc = 0.0;
};

/// positive[i] marks ground-truth positives; larger scores mean "more positive".
Curves roc_pr_curves(std::span<const bool> positive, std::span<const double> scores);
Curves roc_pr_curves(std::span<const std::string> truth, std::span<const double> scores,
                     const std::string& positive_label);

/// true class -> (wrong predicted class -> percent of that true class's rows). Zero cells omitted.
using MisclassificationTable = std::map<std::string, std::map<std::string, double>>;
MisclassificationTable misclassification_table(const ConfusionMatrix& cm);

struct MeanStd {
  double mean = 0.0, stddev = 0.0;  // population standard deviation
};
MeanStd mean_std(std::span<const double> v);

}  // namespace zcam::eval
