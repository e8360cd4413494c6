#include "zcam/threshold.hpp"

#include <algorithm>
#include <cmath>

#include "zcam/error.hpp"

namespace zcam::oc {

double percentile(std::span<const double> values, double p) {
  if (values.empty()) fail(Errc::EmptyScores, "percentile of an empty set");
  if (!(p >= 0.0 && p <= 100.0)) fail(Errc::InvalidArgument, "percentile must lie in [0, 100]");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  const double pos = p / 100.0 * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return s[lo] + frac * (s[hi] - s[lo]);
}

double calibrate_threshold(std::span<const double> scores, double p) {
  if (scores.empty()) fail(Errc::EmptyScores, "no calibration scores");
  return percentile(scores, p);
}

std::vector<Decision> flag_above(std::span<const double> scores, double threshold) {
  std::vector<Decision> out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back(s > threshold ? Decision::Outlier : Decision::Inlier);
  return out;
}

std::vector<Decision> flag_below(std::span<const double> scores, double threshold) {
  std::vector<Decision> out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back(s < threshold ? Decision::Outlier : Decision::Inlier);
  return out;
}

std::size_t count_outliers(std::span<const Decision> d) {
  return static_cast<std::size_t>(std::count(d.begin(), d.end(), Decision::Outlier));
}

}  // namespace zcam::oc
