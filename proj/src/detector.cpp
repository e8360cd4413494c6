#include "zcam/detector.hpp"

#include "zcam/error.hpp"

namespace zcam::oc {

std::string_view detector_name(DetectorKind k) {
  switch (k) {
    case DetectorKind::Ocsvm: return "ocsvm";
    case DetectorKind::SgdOcsvm: return "sgdocsvm";
    case DetectorKind::IsolationForest: return "iforest";
    case DetectorKind::DeepSvdd: return "deepsvdd";
  }
  return "?";
}

bool is_detector_name(std::string_view name) {
  for (auto k : kAllDetectorKinds)
    if (detector_name(k) == name) return true;
  return false;
}

DetectorKind parse_detector_kind(std::string_view name) {
  for (auto k : kAllDetectorKinds)
    if (detector_name(k) == name) return k;
  fail(Errc::Usage, "unknown detector '" + std::string(name) + "'");
}

Detector train_detector(DetectorKind kind, const Matrix& x, const DetectorParams& params,
                        std::uint64_t seed) {
  Detector d;
  d.kind = kind;
  switch (kind) {
    case DetectorKind::Ocsvm:
      d.model = train_ocsvm(x, params.ocsvm);
      break;
    case DetectorKind::SgdOcsvm: {
      auto p = params.sgd;
      p.seed = seed;
      d.model = train_sgd_ocsvm(x, p);
      break;
    }
    case DetectorKind::IsolationForest: {
      auto p = params.iforest;
      p.seed = seed;
      d.model = train_isolation_forest(x, p);
      break;
    }
    case DetectorKind::DeepSvdd: {
      auto c = params.deep;
      c.seed = seed;
      c.input_dim = x.cols();
      d.model = train_deep_svdd(x, c);
      break;
    }
  }
  return d;
}

std::vector<double> native_scores(const Detector& d, const Matrix& x) {
  return std::visit(
      [&](const auto& m) -> std::vector<double> {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, OcsvmModel> || std::is_same_v<M, SgdOcsvmModel>)
          return decision_function(m, x);
        else if constexpr (std::is_same_v<M, IsolationForestModel>)
          return isolation_scores(m, x);
        else
          return svdd_distances(m, x);
      },
      d.model);
}

std::vector<double> anomaly_scores(const Detector& d, const Matrix& x) {
  auto s = native_scores(d, x);
  if (d.kind == DetectorKind::Ocsvm || d.kind == DetectorKind::SgdOcsvm)
    for (auto& v : s) v = -v;
  return s;
}

std::vector<Decision> decide(const Detector& d, const Matrix& x) {
  const auto s = native_scores(d, x);
  switch (d.kind) {
    case DetectorKind::Ocsvm:
    case DetectorKind::SgdOcsvm:
      return flag_below(s, 0.0);
    case DetectorKind::IsolationForest:
      return flag_above(s, std::get<IsolationForestModel>(d.model).threshold);
    case DetectorKind::DeepSvdd:
      return flag_above(s, std::get<DeepSvddModel>(d.model).threshold);
  }
  return {};
}

std::size_t input_width(const Detector& d) {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, OcsvmModel>) return m.support_vectors.cols();
        else if constexpr (std::is_same_v<M, SgdOcsvmModel>) return m.map.input_dim();
        else if constexpr (std::is_same_v<M, IsolationForestModel>) return m.n_features;
        else return m.config.input_dim;
      },
      d.model);
}

}  // namespace zcam::oc
