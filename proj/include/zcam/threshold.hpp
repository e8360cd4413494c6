#pragma once

#include <span>
#include <vector>

namespace zcam::oc {

enum class Decision : unsigned char { Inlier, Outlier };

/// Linear-interpolation percentile (p in [0, 100]) of `values`.
double percentile(std::span<const double> values, double p);

/// Threshold at the given percentile of calibration scores. Throws EmptyScores.
double calibrate_threshold(std::span<const double> scores, double p);

/// Higher score means more anomalous: outlier iff score > threshold.
std::vector<Decision> flag_above(std::span<const double> scores, double threshold);
/// Lower score means more anomalous: outlier iff score < threshold.
std::vector<Decision> flag_below(std::span<const double> scores, double threshold);

std::size_t count_outliers(std::span<const Decision> d);

}  // namespace zcam::oc
