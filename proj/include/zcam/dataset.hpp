#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "zcam/matrix.hpp"

namespace zcam::data {

/// Flow identity columns carried alongside the features, never used as features.
struct RowMeta {
  std::string flow_id, src_ip, src_port, dst_ip, dst_port, protocol, timestamp;
  bool operator==(const RowMeta&) const = default;
};

struct ScalerParams {
  std::vector<double> mean;
  std::vector<double> stddev;
  bool operator==(const ScalerParams&) const = default;
};

struct FeatureMatrix {
  std::vector<std::string> column_names;
  Matrix values;
  std::vector<std::string> labels;  // empty, or one per row
  std::vector<RowMeta> meta;        // empty, or one per row
  std::string source = "synthetic";  // BITSPHC, UNSW, Others, Combined, synthetic
  std::size_t dropped_rows = 0;      // non-finite rows removed at load
  std::vector<std::string> pruned;   // constant columns removed
  std::optional<ScalerParams> scaler;

  std::size_t rows() const noexcept { return values.rows(); }
  std::size_t cols() const noexcept { return values.cols(); }
  bool has_labels() const noexcept { return !labels.empty(); }

  FeatureMatrix select_rows(std::span<const std::size_t> idx) const;
  /// Rows whose label equals `label`.
  FeatureMatrix with_label(const std::string& label) const;
};

/// Maps a CSV header name (ours or a CICFlowMeter variant) to the canonical
/// column name. Unknown names pass through trimmed.
std::string canonical_column(std::string_view name);

using LabelMap = std::map<std::string, std::string>;

/// Loads flow CSVs. Identity columns become RowMeta; Label becomes labels; every
/// other column is a numeric feature. Rows with non-finite values are dropped.
FeatureMatrix load_records(std::span<const std::filesystem::path> paths, const LabelMap* label_map = nullptr,
                           std::string source = "Combined");
FeatureMatrix read_csv(std::istream& in, const std::string& origin = "<stream>");

/// Writes identity columns (when present), features, then Label.
void write_csv(std::ostream& out, const FeatureMatrix& m);

/// Row-concatenation; schemas must match by name.
FeatureMatrix concat(std::span<const FeatureMatrix> parts);

FeatureMatrix prune_constant(const FeatureMatrix& m);

ScalerParams fit_scaler(const Matrix& train);
Matrix apply_scaler(const ScalerParams& p, const Matrix& m);
Matrix inverse_scaler(const ScalerParams& p, const Matrix& m);

struct ScaledSets {
  FeatureMatrix train;
  std::vector<FeatureMatrix> others;
  ScalerParams params;
};
ScaledSets fit_apply_scaler(const FeatureMatrix& train, std::span<const FeatureMatrix> others);

struct SplitIndices {
  std::vector<std::size_t> train, test;
};
/// Stratified by label when labels are present; deterministic in `seed`.
SplitIndices split_indices(std::size_t n_rows, std::span<const std::string> labels, double test_fraction,
                           std::uint64_t seed);
std::pair<FeatureMatrix, FeatureMatrix> split(const FeatureMatrix& m, double test_fraction, std::uint64_t seed);

struct FeatureRanking {
  std::vector<std::pair<std::string, double>> entries;  // descending importance
};

/// Extra-Trees impurity importance. Randomness is keyed by column name, so
/// permuting columns permutes the ranking and nothing else.
FeatureRanking rank_features(const FeatureMatrix& m, std::size_t n_trees = 100, std::uint64_t seed = 0);
FeatureMatrix select_top_k(const FeatureMatrix& m, const FeatureRanking& ranking, std::size_t k);

void write_ranking(std::ostream& out, const FeatureRanking& r);
FeatureRanking read_ranking(std::istream& in);

/// Stable 64-bit identity of a column name.
std::uint64_t column_key(std::string_view name);

}  // namespace zcam::data
