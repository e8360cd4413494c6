#pragma once

#include <array>
#include <string_view>
#include <variant>
#include <vector>

#include "zcam/deep_svdd.hpp"
#include "zcam/iforest.hpp"
#include "zcam/matrix.hpp"
#include "zcam/ocsvm.hpp"
#include "zcam/sgd_ocsvm.hpp"
#include "zcam/threshold.hpp"

namespace zcam::oc {

enum class DetectorKind { Ocsvm, SgdOcsvm, IsolationForest, DeepSvdd };

inline constexpr std::array kAllDetectorKinds{DetectorKind::Ocsvm, DetectorKind::SgdOcsvm,
                                              DetectorKind::IsolationForest, DetectorKind::DeepSvdd};

std::string_view detector_name(DetectorKind k);  // ocsvm, sgdocsvm, iforest, deepsvdd
DetectorKind parse_detector_kind(std::string_view name);
bool is_detector_name(std::string_view name);

struct DetectorParams {
  OcsvmParams ocsvm;
  SgdOcsvmParams sgd;
  IsolationForestParams iforest;
  DeepSvddConfig deep;
};

using DetectorModel = std::variant<OcsvmModel, SgdOcsvmModel, IsolationForestModel, DeepSvddModel>;

struct Detector {
  DetectorKind kind = DetectorKind::DeepSvdd;
  DetectorModel model;
  bool operator==(const Detector&) const = default;
};

/// Seed overrides the per-model seeds in `params`; DeepSVDD's input width follows x.
Detector train_detector(DetectorKind kind, const Matrix& x, const DetectorParams& params,
                        std::uint64_t seed);

/// Native score: OCSVM/SGD decision value (low = anomalous), IF score and
/// DeepSVDD squared distance (high = anomalous).
std::vector<double> native_scores(const Detector& d, const Matrix& x);
/// Anomaly score oriented so that larger always means more anomalous.
std::vector<double> anomaly_scores(const Detector& d, const Matrix& x);
std::vector<Decision> decide(const Detector& d, const Matrix& x);

std::size_t input_width(const Detector& d);

}  // namespace zcam::oc
