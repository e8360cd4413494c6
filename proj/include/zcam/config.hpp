#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zcam/classifier.hpp"
#include "zcam/decomp_params.hpp"
#include "zcam/detector.hpp"
#include "zcam/flow.hpp"
#include "zcam/scenario.hpp"

namespace zcam {

/// Every knob of a pipeline run. Defaults keep the top 10 features.
struct PipelineConfig {
  std::string task = "detect";  // extract | classify | detect | scenario | decompose
  // Inputs: flow CSVs, or pcaps written as path or path:Label.
  std::vector<std::string> inputs;
  std::string output_dir;  // empty: $ZCAM_OUT_DIR, else ./zcam-out
  flow::Timeouts timeouts;

  bool prune = true;
  bool scale = true;
  std::size_t top_k = 10;
  std::string ranking_file;  // empty: rank on the training split
  std::size_t ranking_trees = 100;
  double test_fraction = 0.1;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};

  std::string model = "deepsvdd";
  std::string model_file;    // load instead of training
  std::string others_label = "Others";
  std::vector<std::string> train_labels;  // detector training rows; empty: all
  std::string positive_label;             // metrics positive class; empty: none

  eval::ScenarioKind scenario = eval::ScenarioKind::AllZeroDay;
  std::vector<std::string> scenario_models{"ocsvm", "sgdocsvm", "iforest", "deepsvdd"};

  ml::ClassifierParams classifier;
  oc::DetectorParams detector;
  decomp::DecompParams decomposition;
};

/// Sets one key; unknown keys and malformed values raise Usage.
void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value);
/// Parses `key = value` lines; '#' starts a comment.
void apply_config_text(PipelineConfig& cfg, std::istream& in, const std::string& origin = "<config>");
PipelineConfig load_config(const std::filesystem::path& path);

/// All settings in a fixed order, formatted as they would be written in a config file.
std::vector<std::pair<std::string, std::string>> config_entries(const PipelineConfig& cfg);
std::vector<std::string> config_keys();

}  // namespace zcam
