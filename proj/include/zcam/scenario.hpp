#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zcam/classifier.hpp"
#include "zcam/detector.hpp"
#include "zcam/matrix.hpp"
#include "zcam/metrics.hpp"

namespace zcam::eval {

enum class ScenarioKind { AllZeroDay, AllButOne, OnlyOne };
std::string_view scenario_name(ScenarioKind k);  // all-zero-day, all-but-one, only-one
ScenarioKind parse_scenario_kind(std::string_view name);

struct NamedSet {
  std::string name;
  Matrix x;
};

struct ScenarioInputs {
  std::vector<NamedSet> cameras;
  std::optional<NamedSet> others;
};

struct ScenarioOptions {
  std::vector<oc::DetectorKind> detectors{oc::kAllDetectorKinds.begin(), oc::kAllDetectorKinds.end()};
  oc::DetectorParams params;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  double test_fraction = 0.1;  // all-zero-day split of the Others set
  bool scale = true;           // standardize on the training rows (zero-variance columns left unscaled)
};

struct SetOutcome {
  std::string name;
  bool expect_outlier = true;
  std::size_t rows = 0, inliers = 0, outliers = 0;
  double accuracy = 0.0;  // fraction decided as expected
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::size_t train_rows = 0, train_inliers = 0;
  double train_accuracy = 0.0;  // inlier fraction on the training rows
  double test_accuracy = 0.0;   // outlier fraction over all zero-day test rows
  std::size_t test_inliers = 0, test_outliers = 0;
  std::vector<SetOutcome> sets;
  double train_seconds = 0.0, predict_seconds = 0.0;
};

struct ModelOutcome {
  oc::DetectorKind kind = oc::DetectorKind::DeepSvdd;
  std::vector<SeedOutcome> seeds;
  MeanStd train_accuracy, test_accuracy;
};

struct ScenarioReport {
  ScenarioKind kind = ScenarioKind::AllZeroDay;
  std::string trained_on;
  std::vector<std::string> tested_on;
  std::vector<std::uint64_t> seeds;
  std::vector<ModelOutcome> models;
};

/// all-zero-day yields one report; the other two kinds one per camera.
std::vector<ScenarioReport> run_zero_day_scenario(ScenarioKind kind, const ScenarioInputs& inputs,
                                                  const ScenarioOptions& options = {});

struct SupervisedOutcome {
  ml::ClassifierKind kind = ml::ClassifierKind::Cart;
  Metrics metrics;
  MisclassificationTable misclassification;
  double train_seconds = 0.0, predict_seconds = 0.0;
};

std::vector<SupervisedOutcome> run_supervised(const Matrix& train_x, std::span<const std::string> train_y,
                                              const Matrix& test_x, std::span<const std::string> test_y,
                                              std::span<const ml::ClassifierKind> kinds,
                                              const ml::ClassifierParams& params = {},
                                              const std::optional<std::string>& positive = std::nullopt);

}  // namespace zcam::eval
