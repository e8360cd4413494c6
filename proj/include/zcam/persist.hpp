#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "zcam/classifier.hpp"
#include "zcam/dataset.hpp"
#include "zcam/detector.hpp"

namespace zcam::persist {

inline constexpr std::uint32_t kFormatVersion = 1;

struct FeatureSchema {
  std::vector<std::string> names;
  std::optional<data::ScalerParams> scaler;
  bool operator==(const FeatureSchema&) const = default;
};

struct Fingerprint {
  std::string data_hash;  // 16 hex digits
  std::uint64_t seed = 0;
  std::size_t training_rows = 0;
  std::string created;    // UTC, ISO 8601
  bool operator==(const Fingerprint&) const = default;
};

using AnyModel = std::variant<ml::Classifier, oc::Detector>;

struct ModelArtifact {
  std::uint32_t format_version = kFormatVersion;
  FeatureSchema schema;
  AnyModel model;
  Fingerprint fingerprint;

  /// cart, rf, ..., ocsvm, sgdocsvm, iforest, deepsvdd
  std::string kind() const;
  bool operator==(const ModelArtifact&) const = default;
};

std::string serialize(const ModelArtifact& a);
ModelArtifact deserialize(std::string_view bytes);
void save_artifact(const ModelArtifact& a, const std::filesystem::path& path);
ModelArtifact load_artifact(const std::filesystem::path& path);

/// Column positions of the schema's features inside `columns`; SchemaMismatch names any missing.
std::vector<std::size_t> resolve_schema(const FeatureSchema& schema, std::span<const std::string> columns);
/// Selects, orders and (when the schema has a scaler) standardizes the model's columns.
Matrix prepare_input(const FeatureSchema& schema, const data::FeatureMatrix& m);

std::string hash_training_data(const Matrix& x, std::span<const std::string> labels);
std::string utc_timestamp();
std::uint32_t crc32(std::string_view bytes);

}  // namespace zcam::persist
