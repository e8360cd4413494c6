#include "zcam/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "zcam/error.hpp"
#include "zcam/flow_csv.hpp"
#include "zcam/forest.hpp"
#include "zcam/classifier.hpp"
#include "zcam/rng.hpp"

namespace zcam::data {
namespace {

enum class MetaField { FlowId, SrcIp, SrcPort, DstIp, DstPort, Protocol, Timestamp };

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<MetaField> meta_field(const std::string& name) {
  static const std::unordered_map<std::string, MetaField> fields = {
      {"Flow ID", MetaField::FlowId},        {"Src IP", MetaField::SrcIp},
      {"Source IP", MetaField::SrcIp},       {"Src Port", MetaField::SrcPort},
      {"Source Port", MetaField::SrcPort},   {"Dst IP", MetaField::DstIp},
      {"Destination IP", MetaField::DstIp},  {"Dst Port", MetaField::DstPort},
      {"Destination Port", MetaField::DstPort}, {"Protocol", MetaField::Protocol},
      {"Timestamp", MetaField::Timestamp},
  };
  if (auto it = fields.find(name); it != fields.end()) return it->second;
  return std::nullopt;
}

std::string& meta_slot(RowMeta& m, MetaField f) {
  switch (f) {
    case MetaField::FlowId: return m.flow_id;
    case MetaField::SrcIp: return m.src_ip;
    case MetaField::SrcPort: return m.src_port;
    case MetaField::DstIp: return m.dst_ip;
    case MetaField::DstPort: return m.dst_port;
    case MetaField::Protocol: return m.protocol;
    case MetaField::Timestamp: return m.timestamp;
  }
  return m.flow_id;
}

double parse_value(std::string_view s) {
  const std::string t = trim(s);
  double v = 0.0;
  const char* first = t.data();
  if (!t.empty() && t[0] == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) return std::numeric_limits<double>::quiet_NaN();
  return v;
}

struct Schema {
  std::vector<std::string> features;
  std::vector<std::ptrdiff_t> feature_col;  // source column of each feature
  std::vector<std::pair<MetaField, std::size_t>> meta_cols;
  std::optional<std::size_t> label_col;
  std::size_t width = 0;
};

Schema parse_header(const std::string& line, const std::string& origin) {
  Schema s;
  const auto cells = split_line(line);
  s.width = cells.size();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::string name = canonical_column(cells[i]);
    if (name == "Label") {
      s.label_col = i;
    } else if (auto f = meta_field(name)) {
      s.meta_cols.emplace_back(*f, i);
    } else if (std::find(s.features.begin(), s.features.end(), name) == s.features.end()) {
      // Duplicate columns (e.g. "Fwd Header Length.1" in some exports) keep the first copy.
      s.features.push_back(name);
      s.feature_col.push_back(static_cast<std::ptrdiff_t>(i));
    }
  }
  if (!s.label_col) fail(Errc::SchemaMismatch, origin + ": no Label column");
  return s;
}

}  // namespace

std::string canonical_column(std::string_view raw) {
  static const std::unordered_map<std::string, std::string> aliases = {
      {"Total Fwd Packets", "Tot Fwd Pkts"},
      {"Total Backward Packets", "Tot Bwd Pkts"},
      {"Total Length of Fwd Packets", "TotLen Fwd Pkts"},
      {"Total Length of Bwd Packets", "TotLen Bwd Pkts"},
      {"Fwd Packet Length Max", "Fwd Pkt Len Max"},
      {"Fwd Packet Length Min", "Fwd Pkt Len Min"},
      {"Fwd Packet Length Mean", "Fwd Pkt Len Mean"},
      {"Fwd Packet Length Std", "Fwd Pkt Len Std"},
      {"Bwd Packet Length Max", "Bwd Pkt Len Max"},
      {"Bwd Packet Length Min", "Bwd Pkt Len Min"},
      {"Bwd Packet Length Mean", "Bwd Pkt Len Mean"},
      {"Bwd Packet Length Std", "Bwd Pkt Len Std"},
      {"Flow Bytes/s", "Flow Byts/s"},
      {"Flow Packets/s", "Flow Pkts/s"},
      {"Fwd IAT Total", "Fwd IAT Tot"},
      {"Bwd IAT Total", "Bwd IAT Tot"},
      {"Fwd Header Length", "Fwd Header Len"},
      {"Bwd Header Length", "Bwd Header Len"},
      {"Fwd Packets/s", "Fwd Pkts/s"},
      {"Bwd Packets/s", "Bwd Pkts/s"},
      {"Min Packet Length", "Pkt Len Min"},
      {"Max Packet Length", "Pkt Len Max"},
      {"Packet Length Min", "Pkt Len Min"},
      {"Packet Length Max", "Pkt Len Max"},
      {"Packet Length Mean", "Pkt Len Mean"},
      {"Packet Length Std", "Pkt Len Std"},
      {"Packet Length Variance", "Pkt Len Var"},
      {"FIN Flag Count", "FIN Flag Cnt"},
      {"SYN Flag Count", "SYN Flag Cnt"},
      {"RST Flag Count", "RST Flag Cnt"},
      {"PSH Flag Count", "PSH Flag Cnt"},
      {"ACK Flag Count", "ACK Flag Cnt"},
      {"URG Flag Count", "URG Flag Cnt"},
      {"CWE Flag Count", "CWR Flag Cnt"},
      {"CWR Flag Count", "CWR Flag Cnt"},
      {"ECE Flag Count", "ECE Flag Cnt"},
      {"Average Packet Size", "Pkt Size Avg"},
      {"Avg Fwd Segment Size", "Fwd Seg Size Avg"},
      {"Avg Bwd Segment Size", "Bwd Seg Size Avg"},
      {"Fwd Avg Bytes/Bulk", "Fwd Byts/b Avg"},
      {"Fwd Avg Packets/Bulk", "Fwd Pkts/b Avg"},
      {"Fwd Avg Bulk Rate", "Fwd Blk Rate Avg"},
      {"Bwd Avg Bytes/Bulk", "Bwd Byts/b Avg"},
      {"Bwd Avg Packets/Bulk", "Bwd Pkts/b Avg"},
      {"Bwd Avg Bulk Rate", "Bwd Blk Rate Avg"},
      {"Subflow Fwd Packets", "Subflow Fwd Pkts"},
      {"Subflow Fwd Bytes", "Subflow Fwd Byts"},
      {"Subflow Bwd Packets", "Subflow Bwd Pkts"},
      {"Subflow Bwd Bytes", "Subflow Bwd Byts"},
      {"Init_Win_bytes_forward", "Init Fwd Win Byts"},
      {"Init_Win_bytes_backward", "Init Bwd Win Byts"},
      {"act_data_pkt_fwd", "Fwd Act Data Pkts"},
      {"min_seg_size_forward", "Fwd Seg Size Min"},
      {"Fwd Header Length.1", "Fwd Header Len"},
  };
  std::string name = trim(raw);
  if (auto it = aliases.find(name); it != aliases.end()) return it->second;
  return name;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> idx) const {
  FeatureMatrix out;
  out.column_names = column_names;
  out.values = values.select_rows(idx);
  out.source = source;
  out.pruned = pruned;
  out.scaler = scaler;
  for (auto i : idx) {
    if (!labels.empty()) out.labels.push_back(labels[i]);
    if (!meta.empty()) out.meta.push_back(meta[i]);
  }
  return out;
}

FeatureMatrix FeatureMatrix::with_label(const std::string& label) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) idx.push_back(i);
  return select_rows(idx);
}

FeatureMatrix read_csv(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) fail(Errc::EmptyDataset, origin + ": empty file");
  const Schema schema = parse_header(line, origin);
  FeatureMatrix m;
  m.column_names = schema.features;
  m.values = Matrix(0, schema.features.size());
  std::vector<double> row(schema.features.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != schema.width)
      fail(Errc::SchemaMismatch, origin + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(schema.width) + " fields, got " + std::to_string(cells.size()));
    bool finite = true;
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] = parse_value(cells[static_cast<std::size_t>(schema.feature_col[j])]);
      finite = finite && std::isfinite(row[j]);
    }
    if (!finite) {
      ++m.dropped_rows;
      continue;
    }
    m.values.append_row(row);
    m.labels.push_back(trim(cells[*schema.label_col]));
    RowMeta meta;
    for (auto [field, col] : schema.meta_cols) meta_slot(meta, field) = trim(cells[col]);
    m.meta.push_back(std::move(meta));
  }
  return m;
}

FeatureMatrix concat(std::span<const FeatureMatrix> parts) {
  if (parts.empty()) fail(Errc::EmptyDataset, "nothing to concatenate");
  FeatureMatrix out;
  out.column_names = parts.front().column_names;
  out.values = Matrix(0, out.column_names.size());
  out.source = parts.front().source;
  for (const auto& p : parts) {
    std::vector<std::size_t> cols;
    for (const auto& name : out.column_names) {
      auto it = std::find(p.column_names.begin(), p.column_names.end(), name);
      if (it == p.column_names.end()) fail(Errc::SchemaMismatch, "column '" + name + "' missing from a part");
      cols.push_back(static_cast<std::size_t>(it - p.column_names.begin()));
    }
    if (p.column_names.size() != cols.size()) fail(Errc::SchemaMismatch, "parts have different column sets");
    const Matrix v = p.values.select_cols(cols);
    for (std::size_t i = 0; i < v.rows(); ++i) out.values.append_row(v.row(i));
    if (p.labels.size() == p.rows()) {
      out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
    } else {
      out.labels.insert(out.labels.end(), p.rows(), std::string());
    }
    if (p.meta.size() == p.rows()) {
      out.meta.insert(out.meta.end(), p.meta.begin(), p.meta.end());
    } else {
      out.meta.insert(out.meta.end(), p.rows(), RowMeta{});
    }
    out.dropped_rows += p.dropped_rows;
    if (p.source != out.source) out.source = "Combined";
  }
  return out;
}

FeatureMatrix load_records(std::span<const std::filesystem::path> paths, const LabelMap* label_map,
                           std::string source) {
  if (paths.empty()) fail(Errc::EmptyDataset, "no input files");
  std::vector<FeatureMatrix> parts;
  for (const auto& p : paths) {
    std::ifstream in(p);
    if (!in) fail(Errc::Io, "cannot open " + p.string());
    parts.push_back(read_csv(in, p.string()));
  }
  FeatureMatrix m = concat(parts);
  m.source = std::move(source);
  if (m.rows() == 0) fail(Errc::EmptyDataset, "no finite rows in input");
  if (label_map)
    for (auto& l : m.labels)
      if (auto it = label_map->find(l); it != label_map->end()) l = it->second;
  return m;
}

void write_csv(std::ostream& out, const FeatureMatrix& m) {
  const bool with_meta = m.meta.size() == m.rows() && m.rows() > 0;
  std::vector<std::string> head;
  if (with_meta) head = {"Flow ID", "Src IP", "Src Port", "Dst IP", "Dst Port", "Protocol", "Timestamp"};
  head.insert(head.end(), m.column_names.begin(), m.column_names.end());
  head.push_back("Label");
  for (std::size_t i = 0; i < head.size(); ++i) out << (i ? "," : "") << head[i];
  out << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (with_meta) {
      const auto& t = m.meta[r];
      out << t.flow_id << ',' << t.src_ip << ',' << t.src_port << ',' << t.dst_ip << ',' << t.dst_port << ','
          << t.protocol << ',' << t.timestamp << ',';
    }
    for (std::size_t c = 0; c < m.cols(); ++c) out << flow::format_number(m.values(r, c)) << ',';
    out << (m.labels.size() == m.rows() ? m.labels[r] : std::string()) << '\n';
  }
}

FeatureMatrix prune_constant(const FeatureMatrix& m) {
  std::vector<std::size_t> keep;
  FeatureMatrix out;
  out.pruned = m.pruned;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    bool constant = true;
    for (std::size_t r = 1; r < m.rows() && constant; ++r) constant = m.values(r, c) == m.values(0, c);
    if (constant)
      out.pruned.push_back(m.column_names[c]);
    else
      keep.push_back(c);
  }
  if (keep.empty()) fail(Errc::AllConstant, "every column is constant");
  for (auto c : keep) out.column_names.push_back(m.column_names[c]);
  out.values = m.values.select_cols(keep);
  out.labels = m.labels;
  out.meta = m.meta;
  out.source = m.source;
  out.dropped_rows = m.dropped_rows;
  out.scaler = m.scaler;
  return out;
}

ScalerParams fit_scaler(const Matrix& train) {
  if (train.rows() == 0) fail(Errc::EmptyDataset, "cannot fit a scaler on zero rows");
  ScalerParams p;
  const double n = static_cast<double>(train.rows());
  for (std::size_t c = 0; c < train.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < train.rows(); ++r) mean += train(r, c);
    mean /= n;
    double m2 = 0.0;
    for (std::size_t r = 0; r < train.rows(); ++r) m2 += (train(r, c) - mean) * (train(r, c) - mean);
    const double sd = std::sqrt(m2 / n);
    if (!(sd > 0.0)) fail(Errc::ZeroStd, "column " + std::to_string(c) + " has zero standard deviation");
    p.mean.push_back(mean);
    p.stddev.push_back(sd);
  }
  return p;
}

Matrix apply_scaler(const ScalerParams& p, const Matrix& m) {
  if (m.cols() != p.mean.size()) fail(Errc::DimensionMismatch, "scaler width");
  Matrix out = m;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = (m(r, c) - p.mean[c]) / p.stddev[c];
  return out;
}

Matrix inverse_scaler(const ScalerParams& p, const Matrix& m) {
  if (m.cols() != p.mean.size()) fail(Errc::DimensionMismatch, "scaler width");
  Matrix out = m;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c) * p.stddev[c] + p.mean[c];
  return out;
}

ScaledSets fit_apply_scaler(const FeatureMatrix& train, std::span<const FeatureMatrix> others) {
  ScaledSets s;
  s.params = fit_scaler(train.values);
  s.train = train;
  s.train.values = apply_scaler(s.params, train.values);
  s.train.scaler = s.params;
  for (const auto& o : others) {
    if (o.column_names != train.column_names) fail(Errc::SchemaMismatch, "scaled sets must share columns");
    FeatureMatrix t = o;
    t.values = apply_scaler(s.params, o.values);
    t.scaler = s.params;
    s.others.push_back(std::move(t));
  }
  return s;
}

SplitIndices split_indices(std::size_t n, std::span<const std::string> labels, double test_fraction,
                           std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    fail(Errc::InvalidArgument, "test fraction must lie in (0, 1)");
  const auto n_test = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * test_fraction - 1e-9));
  if (n < 2 || n_test == 0 || n_test >= n) fail(Errc::TooFewRows, "cannot split " + std::to_string(n) + " rows");

  // Group rows by class (a single group when unlabeled).
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[labels.empty() ? std::string() : labels[i]].push_back(i);

  // Largest-remainder allocation of test rows across classes.
  std::vector<std::size_t> quota;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0, g = 0;
  for (const auto& [label, rows] : groups) {
    const double exact = static_cast<double>(rows.size()) * static_cast<double>(n_test) / static_cast<double>(n);
    const auto q = static_cast<std::size_t>(std::floor(exact + 1e-9));
    quota.push_back(q);
    remainders.emplace_back(exact - static_cast<double>(q), g++);
    assigned += q;
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < n_test && i < remainders.size(); ++i, ++assigned) ++quota[remainders[i].second];

  SplitIndices out;
  Rng rng(seed);
  g = 0;
  for (auto& [label, rows] : groups) {
    rng.shuffle(rows);
    out.test.insert(out.test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(quota[g]));
    out.train.insert(out.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(quota[g]), rows.end());
    ++g;
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::pair<FeatureMatrix, FeatureMatrix> split(const FeatureMatrix& m, double test_fraction, std::uint64_t seed) {
  const auto idx = split_indices(m.rows(), m.labels, test_fraction, seed);
  return {m.select_rows(idx.train), m.select_rows(idx.test)};
}

std::uint64_t column_key(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) h = (h ^ c) * 0x100000001b3ULL;
  return splitmix64(h);
}

FeatureRanking rank_features(const FeatureMatrix& m, std::size_t n_trees, std::uint64_t seed) {
  if (!m.has_labels()) fail(Errc::SingleClass, "ranking needs labels");
  const auto enc = ml::encode_labels(m.labels);
  if (enc.classes.size() < 2) fail(Errc::SingleClass, "ranking needs at least 2 classes");
  std::vector<std::uint64_t> keys;
  for (const auto& name : m.column_names) keys.push_back(column_key(name));
  ml::ForestParams fp;
  fp.kind = ml::ForestKind::Extra;
  fp.n_trees = n_trees;
  fp.seed = seed;
  const auto forest = ml::train_forest(m.values, enc.y, static_cast<int>(enc.classes.size()), fp, keys);
  const auto imp = ml::feature_importances(forest);
  std::vector<std::size_t> order(imp.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (imp[a] != imp[b]) return imp[a] > imp[b];
    return m.column_names[a] < m.column_names[b];
  });
  FeatureRanking r;
  for (auto i : order) r.entries.emplace_back(m.column_names[i], imp[i]);
  return r;
}

FeatureMatrix select_top_k(const FeatureMatrix& m, const FeatureRanking& ranking, std::size_t k) {
  if (k == 0 || k > m.cols() || k > ranking.entries.size())
    fail(Errc::KTooLarge, "k=" + std::to_string(k) + " exceeds " + std::to_string(m.cols()) + " columns");
  std::vector<std::size_t> cols;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& name = ranking.entries[i].first;
    auto it = std::find(m.column_names.begin(), m.column_names.end(), name);
    if (it == m.column_names.end()) fail(Errc::SchemaMismatch, "ranked column '" + name + "' not in matrix");
    cols.push_back(static_cast<std::size_t>(it - m.column_names.begin()));
    names.push_back(name);
  }
  FeatureMatrix out = m;
  out.column_names = std::move(names);
  out.values = m.values.select_cols(cols);
  if (m.scaler) {
    ScalerParams s;
    for (auto c : cols) {
      s.mean.push_back(m.scaler->mean[c]);
      s.stddev.push_back(m.scaler->stddev[c]);
    }
    out.scaler = s;
  }
  return out;
}

void write_ranking(std::ostream& out, const FeatureRanking& r) {
  out << "feature,importance\n";
  for (const auto& [name, imp] : r.entries) out << name << ',' << flow::format_number(imp) << '\n';
}

FeatureRanking read_ranking(std::istream& in) {
  FeatureRanking r;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto pos = line.rfind(',');
    if (pos == std::string::npos) fail(Errc::SchemaMismatch, "ranking line without comma");
    r.entries.emplace_back(trim(line.substr(0, pos)), parse_value(line.substr(pos + 1)));
  }
  return r;
}

}  // namespace zcam::data
