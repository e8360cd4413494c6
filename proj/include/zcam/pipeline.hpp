#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zcam/config.hpp"
#include "zcam/dataset.hpp"
#include "zcam/persist.hpp"
#include "zcam/scenario.hpp"

namespace zcam {

/// cfg.output_dir, else $ZCAM_OUT_DIR, else ./zcam-out.
std::filesystem::path resolve_output_dir(const PipelineConfig& cfg);

/// Exclusive advisory lock on <dir>/.zcam.lock for the lifetime of the object.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  int fd_ = -1;
};

struct InputSpec {
  std::filesystem::path path;
  std::optional<std::string> label;  // pcaps only
};
/// "path" or "path:Label".
InputSpec parse_input(const std::string& text);
bool is_pcap_file(const std::filesystem::path& path);

/// Meters pcaps into an 84-column flow CSV; returns the decode statistics as JSON.
nlohmann::json extract_to_csv(std::span<const InputSpec> pcaps, const flow::Timeouts& timeouts,
                              const std::filesystem::path& out_csv);

/// Loads every input; pcaps are metered first (into <out_dir>/flows.csv when out_dir is given).
data::FeatureMatrix load_inputs(const PipelineConfig& cfg, const std::optional<std::filesystem::path>& out_dir,
                                nlohmann::json* report = nullptr);

struct Prepared {
  data::FeatureMatrix train, test;  // test is empty when no split was requested
  data::FeatureRanking ranking;
  persist::FeatureSchema schema;    // selected names + scaler fitted on train
};

/// prune -> split -> rank on train (or read cfg.ranking_file) -> top-k -> scale.
Prepared prepare(const data::FeatureMatrix& all, const PipelineConfig& cfg, bool split, std::uint64_t seed);

/// Trains the configured model on prepared rows and wraps it with its schema.
persist::ModelArtifact train_artifact(const Prepared& p, const PipelineConfig& cfg, std::uint64_t seed,
                                      double* train_seconds = nullptr);

nlohmann::json to_json(const eval::Metrics& m);
nlohmann::json to_json(const eval::Curves& c);
nlohmann::json to_json(const eval::ScenarioReport& r);
nlohmann::json config_json(const PipelineConfig& cfg);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
void write_curves_csv(const std::filesystem::path& dir, const std::string& stem, const eval::Curves& c);

struct PipelineResult {
  int status = 0;  // process exit code
  std::string error;
  nlohmann::json report;
  std::vector<std::filesystem::path> files;
};

/// Runs cfg.task end to end, writing its outputs and report.json under the
/// output directory. Errors are reported as "<stage>: message" with the
/// matching exit status rather than thrown.
PipelineResult run_pipeline(const PipelineConfig& cfg);

}  // namespace zcam
