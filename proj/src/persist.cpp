#include "zcam/persist.hpp"

#include <zlib.h>

#include <bit>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include "zcam/error.hpp"

namespace zcam::persist {

std::uint32_t crc32(std::string_view bytes) {
  uLong c = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in pieces.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto len = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    c = ::crc32(c, reinterpret_cast<const Bytef*>(bytes.data() + off), len);
    off += len;
  }
  return static_cast<std::uint32_t>(c);
}

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void size(std::size_t v) { u64(static_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    size(s.size());
    buf_.append(s);
  }
  void doubles(std::span<const double> v) {
    size(v.size());
    for (double d : v) f64(d);
  }
  void matrix(const Matrix& m) {
    size(m.rows());
    size(m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (double d : m.row(i)) f64(d);
  }
  void strings(std::span<const std::string> v) {
    size(v.size());
    for (const auto& s : v) str(s);
  }
  std::string& bytes() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view b) : b_(b) {}
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(b_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t size() {
    const std::uint64_t v = u64();
    if (v > b_.size()) fail(Errc::CorruptPayload, "implausible length in model payload");
    return static_cast<std::size_t>(v);
  }
  std::string str() {
    const std::size_t n = size();
    need(n);
    std::string s(b_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::vector<double> doubles() {
    const std::size_t n = size();
    need(n * 8);
    std::vector<double> v(n);
    for (auto& d : v) d = f64();
    return v;
  }
  Matrix matrix() {
    const std::size_t r = size(), c = size();
    if (c != 0 && r > b_.size() / c) fail(Errc::CorruptPayload, "implausible matrix shape");
    need(r * c * 8);
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (auto& d : m.row(i)) d = f64();
    return m;
  }
  std::vector<std::string> strings() {
    const std::size_t n = size();
    std::vector<std::string> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(str());
    return v;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) fail(Errc::CorruptPayload, "model payload ends early");
  }
  std::string_view b_;
  std::size_t pos_ = 0;
};

// --- trees -------------------------------------------------------------

void put(Writer& w, const ml::DecisionTree& t) {
  w.size(t.n_features());
  w.size(t.n_outputs());
  w.size(t.nodes().size());
  for (const auto& n : t.nodes()) {
    w.i32(n.feature);
    w.f64(n.threshold);
    w.i32(n.left);
    w.i32(n.right);
    w.u32(n.value_offset);
    w.f64(n.weight);
  }
  w.doubles(t.values());
  w.doubles(t.impurity_decrease());
}

ml::DecisionTree get_tree(Reader& r) {
  const std::size_t nf = r.size(), no = r.size();
  ml::DecisionTree t(nf, no);
  const std::size_t n = r.size();
  auto& nodes = t.mutable_nodes();
  nodes.resize(n);
  for (auto& nd : nodes) {
    nd.feature = r.i32();
    nd.threshold = r.f64();
    nd.left = r.i32();
    nd.right = r.i32();
    nd.value_offset = r.u32();
    nd.weight = r.f64();
  }
  t.mutable_values() = r.doubles();
  t.mutable_decrease() = r.doubles();
  for (const auto& nd : nodes) {
    const bool leaf = nd.feature < 0;
    if (!leaf && (nd.left < 0 || nd.right < 0 || static_cast<std::size_t>(nd.left) >= n ||
                  static_cast<std::size_t>(nd.right) >= n || static_cast<std::size_t>(nd.feature) >= nf))
      fail(Errc::CorruptPayload, "tree node references out of range");
    if (static_cast<std::size_t>(nd.value_offset) + no > t.mutable_values().size())
      fail(Errc::CorruptPayload, "tree value offset out of range");
  }
  return t;
}

// --- classifiers ---------------------------------------------------------

void put(Writer& w, const ml::Classifier& c) {
  w.u8(static_cast<std::uint8_t>(c.kind));
  w.strings(c.classes);
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ml::CartModel>) {
          w.i32(m.n_classes);
          put(w, m.tree);
        } else if constexpr (std::is_same_v<M, ml::ForestModel>) {
          w.u8(static_cast<std::uint8_t>(m.kind));
          w.i32(m.n_classes);
          w.size(m.n_features_per_split);
          w.u64(m.seed);
          w.size(m.trees.size());
          for (const auto& t : m.trees) put(w, t);
        } else if constexpr (std::is_same_v<M, ml::GbtModel>) {
          w.i32(m.n_classes);
          w.f64(m.learning_rate);
          w.doubles(m.init);
          w.size(m.rounds.size());
          for (const auto& round : m.rounds) {
            w.size(round.size());
            for (const auto& t : round) put(w, t);
          }
          w.doubles(m.train_deviance);
        } else if constexpr (std::is_same_v<M, ml::KnnModel>) {
          w.matrix(m.x);
          w.size(m.y.size());
          for (int v : m.y) w.i32(v);
          w.i32(m.n_classes);
          w.size(m.k);
        } else if constexpr (std::is_same_v<M, ml::GnbModel>) {
          w.doubles(m.log_prior);
          w.matrix(m.means);
          w.matrix(m.variances);
          w.f64(m.var_floor);
        } else {
          w.matrix(m.weights);
          w.doubles(m.bias);
          w.size(m.epochs_run.size());
          for (auto e : m.epochs_run) w.size(e);
        }
      },
      c.model);
}

ml::Classifier get_classifier(Reader& r) {
  ml::Classifier c;
  const auto kind = r.u8();
  if (kind > static_cast<std::uint8_t>(ml::ClassifierKind::LinearSvm))
    fail(Errc::CorruptPayload, "unknown classifier kind");
  c.kind = static_cast<ml::ClassifierKind>(kind);
  c.classes = r.strings();
  switch (c.kind) {
    case ml::ClassifierKind::Cart: {
      ml::CartModel m;
      m.n_classes = r.i32();
      m.tree = get_tree(r);
      c.model = std::move(m);
      break;
    }
    case ml::ClassifierKind::RandomForest:
    case ml::ClassifierKind::ExtraTrees: {
      ml::ForestModel m;
      m.kind = static_cast<ml::ForestKind>(r.u8());
      m.n_classes = r.i32();
      m.n_features_per_split = r.size();
      m.seed = r.u64();
      const std::size_t n = r.size();
      for (std::size_t i = 0; i < n; ++i) m.trees.push_back(get_tree(r));
      c.model = std::move(m);
      break;
    }
    case ml::ClassifierKind::Gbt: {
      ml::GbtModel m;
      m.n_classes = r.i32();
      m.learning_rate = r.f64();
      m.init = r.doubles();
      const std::size_t rounds = r.size();
      for (std::size_t i = 0; i < rounds; ++i) {
        const std::size_t k = r.size();
        std::vector<ml::DecisionTree> round;
        for (std::size_t j = 0; j < k; ++j) round.push_back(get_tree(r));
        m.rounds.push_back(std::move(round));
      }
      m.train_deviance = r.doubles();
      c.model = std::move(m);
      break;
    }
    case ml::ClassifierKind::Knn: {
      ml::KnnModel m;
      m.x = r.matrix();
      const std::size_t n = r.size();
      for (std::size_t i = 0; i < n; ++i) m.y.push_back(r.i32());
      m.n_classes = r.i32();
      m.k = r.size();
      c.model = std::move(m);
      break;
    }
    case ml::ClassifierKind::Gnb: {
      ml::GnbModel m;
      m.log_prior = r.doubles();
      m.means = r.matrix();
      m.variances = r.matrix();
      m.var_floor = r.f64();
      c.model = std::move(m);
      break;
    }
    case ml::ClassifierKind::LinearSvm: {
      ml::LinearSvmModel m;
      m.weights = r.matrix();
      m.bias = r.doubles();
      const std::size_t n = r.size();
      for (std::size_t i = 0; i < n; ++i) m.epochs_run.push_back(r.size());
      c.model = std::move(m);
      break;
    }
  }
  return c;
}

// --- detectors -------------------------------------------------------------

void put(Writer& w, const oc::Detector& d) {
  w.u8(static_cast<std::uint8_t>(d.kind));
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, oc::OcsvmModel>) {
          w.matrix(m.support_vectors);
          w.doubles(m.alpha);
          w.f64(m.rho);
          w.f64(m.gamma);
          w.f64(m.nu);
          w.size(m.n_train);
          w.size(m.iterations);
          w.f64(m.kkt_gap);
          w.f64(m.objective);
        } else if constexpr (std::is_same_v<M, oc::SgdOcsvmModel>) {
          w.matrix(m.map.w);
          w.doubles(m.map.offset);
          w.f64(m.map.gamma);
          w.u64(m.map.seed);
          w.doubles(m.w);
          w.f64(m.rho);
          w.f64(m.nu);
          w.f64(m.eta0);
          w.doubles(m.epoch_objective);
        } else if constexpr (std::is_same_v<M, oc::IsolationForestModel>) {
          w.size(m.trees.size());
          for (const auto& t : m.trees) {
            w.size(t.nodes.size());
            for (const auto& n : t.nodes) {
              w.i32(n.feature);
              w.f64(n.threshold);
              w.i32(n.left);
              w.i32(n.right);
              w.u32(n.size);
            }
          }
          w.size(m.psi);
          w.size(m.n_train);
          w.size(m.n_features);
          w.size(m.height_limit);
          w.f64(m.contamination);
          w.f64(m.threshold);
        } else {
          const auto& c = m.config;
          w.size(c.input_dim);
          w.size(c.hidden.size());
          for (auto h : c.hidden) w.size(h);
          w.size(c.latent);
          w.f64(c.learning_rate);
          w.size(c.epochs);
          w.size(c.batch_size);
          w.f64(c.beta1);
          w.f64(c.beta2);
          w.f64(c.adam_eps);
          w.f64(c.percentile);
          w.f64(c.center_eps);
          w.u8(c.soft_boundary ? 1 : 0);
          w.f64(c.nu);
          w.size(c.warmup_epochs);
          w.u64(c.seed);
          w.size(m.weights.size());
          for (const auto& l : m.weights) w.matrix(l);
          w.doubles(m.center);
          w.f64(m.threshold);
          w.f64(m.radius_sq);
          w.doubles(m.epoch_loss);
        }
      },
      d.model);
}

oc::Detector get_detector(Reader& r) {
  oc::Detector d;
  const auto kind = r.u8();
  if (kind > static_cast<std::uint8_t>(oc::DetectorKind::DeepSvdd)) fail(Errc::CorruptPayload, "unknown detector kind");
  d.kind = static_cast<oc::DetectorKind>(kind);
  switch (d.kind) {
    case oc::DetectorKind::Ocsvm: {
      oc::OcsvmModel m;
      m.support_vectors = r.matrix();
      m.alpha = r.doubles();
      m.rho = r.f64();
      m.gamma = r.f64();
      m.nu = r.f64();
      m.n_train = r.size();
      m.iterations = r.size();
      m.kkt_gap = r.f64();
      m.objective = r.f64();
      if (m.alpha.size() != m.support_vectors.rows()) fail(Errc::CorruptPayload, "support vector count mismatch");
      d.model = std::move(m);
      break;
    }
    case oc::DetectorKind::SgdOcsvm: {
      oc::SgdOcsvmModel m;
      m.map.w = r.matrix();
      m.map.offset = r.doubles();
      m.map.gamma = r.f64();
      m.map.seed = r.u64();
      m.w = r.doubles();
      m.rho = r.f64();
      m.nu = r.f64();
      m.eta0 = r.f64();
      m.epoch_objective = r.doubles();
      if (m.w.size() != m.map.components() || m.map.offset.size() != m.map.components())
        fail(Errc::CorruptPayload, "feature map shape mismatch");
      d.model = std::move(m);
      break;
    }
    case oc::DetectorKind::IsolationForest: {
      oc::IsolationForestModel m;
      const std::size_t nt = r.size();
      for (std::size_t t = 0; t < nt; ++t) {
        oc::IsolationTree tree;
        const std::size_t nn = r.size();
        for (std::size_t i = 0; i < nn; ++i) {
          oc::IsolationTree::Node n;
          n.feature = r.i32();
          n.threshold = r.f64();
          n.left = r.i32();
          n.right = r.i32();
          n.size = r.u32();
          tree.nodes.push_back(n);
        }
        m.trees.push_back(std::move(tree));
      }
      m.psi = r.size();
      m.n_train = r.size();
      m.n_features = r.size();
      m.height_limit = r.size();
      m.contamination = r.f64();
      m.threshold = r.f64();
      for (const auto& t : m.trees)
        for (const auto& n : t.nodes)
          if (n.feature >= 0 && (static_cast<std::size_t>(n.feature) >= m.n_features || n.left < 0 || n.right < 0 ||
                                 static_cast<std::size_t>(n.right) >= t.nodes.size()))
            fail(Errc::CorruptPayload, "isolation tree node out of range");
      d.model = std::move(m);
      break;
    }
    case oc::DetectorKind::DeepSvdd: {
      oc::DeepSvddModel m;
      auto& c = m.config;
      c.input_dim = r.size();
      c.hidden.resize(r.size());
      for (auto& h : c.hidden) h = r.size();
      c.latent = r.size();
      c.learning_rate = r.f64();
      c.epochs = r.size();
      c.batch_size = r.size();
      c.beta1 = r.f64();
      c.beta2 = r.f64();
      c.adam_eps = r.f64();
      c.percentile = r.f64();
      c.center_eps = r.f64();
      c.soft_boundary = r.u8() != 0;
      c.nu = r.f64();
      c.warmup_epochs = r.size();
      c.seed = r.u64();
      const std::size_t layers = r.size();
      for (std::size_t l = 0; l < layers; ++l) m.weights.push_back(r.matrix());
      m.center = r.doubles();
      m.threshold = r.f64();
      m.radius_sq = r.f64();
      m.epoch_loss = r.doubles();
      for (std::size_t l = 1; l < m.weights.size(); ++l)
        if (m.weights[l].rows() != m.weights[l - 1].cols()) fail(Errc::CorruptPayload, "layer shapes do not chain");
      if (m.weights.empty() || m.center.size() != m.weights.back().cols())
        fail(Errc::CorruptPayload, "network shape mismatch");
      d.model = std::move(m);
      break;
    }
  }
  return d;
}

// --- container -------------------------------------------------------------

constexpr std::string_view kMagic = "zcam-model";
constexpr std::string_view kSectionTag = "SECT";

void put_section(std::string& out, std::string_view name, const std::string& payload) {
  Writer w;
  w.bytes().append(kSectionTag);
  w.str(name);
  w.size(payload.size());
  w.u32(crc32(payload));
  out += w.bytes();
  out += payload;
}

std::string schema_payload(const FeatureSchema& s) {
  Writer w;
  w.strings(s.names);
  w.u8(s.scaler ? 1 : 0);
  if (s.scaler) {
    w.doubles(s.scaler->mean);
    w.doubles(s.scaler->stddev);
  }
  return std::move(w.bytes());
}

FeatureSchema get_schema(std::string_view payload) {
  Reader r(payload);
  FeatureSchema s;
  s.names = r.strings();
  if (r.u8()) {
    data::ScalerParams p;
    p.mean = r.doubles();
    p.stddev = r.doubles();
    if (p.mean.size() != s.names.size() || p.stddev.size() != s.names.size())
      fail(Errc::CorruptPayload, "scaler width differs from the schema");
    s.scaler = std::move(p);
  }
  if (!r.done()) fail(Errc::CorruptPayload, "trailing bytes in schema section");
  return s;
}

std::string hex32(std::uint32_t v) {
  char b[9];
  std::snprintf(b, sizeof b, "%08x", v);
  return b;
}

}  // namespace

std::string ModelArtifact::kind() const {
  if (const auto* c = std::get_if<ml::Classifier>(&model)) return std::string(ml::kind_name(c->kind));
  return std::string(oc::detector_name(std::get<oc::Detector>(model).kind));
}

std::string serialize(const ModelArtifact& a) {
  std::ostringstream h;
  h << kMagic << '\n'
    << "format_version: " << a.format_version << '\n'
    << "kind: " << a.kind() << '\n'
    << "features: " << a.schema.names.size() << '\n'
    << "training_rows: " << a.fingerprint.training_rows << '\n'
    << "seed: " << a.fingerprint.seed << '\n'
    << "data_hash: " << a.fingerprint.data_hash << '\n'
    << "created: " << a.fingerprint.created << '\n';
  std::string header = h.str();
  header += "header_crc32: " + hex32(crc32(header)) + "\n\n";

  Writer model;
  if (const auto* c = std::get_if<ml::Classifier>(&a.model)) {
    model.u8(0);
    put(model, *c);
  } else {
    model.u8(1);
    put(model, std::get<oc::Detector>(a.model));
  }
  std::string out = header;
  put_section(out, "schema", schema_payload(a.schema));
  put_section(out, "model", model.bytes());
  return out;
}

ModelArtifact deserialize(std::string_view bytes) {
  const std::size_t end = bytes.find("\n\n");
  if (bytes.substr(0, kMagic.size()) != kMagic || end == std::string_view::npos)
    fail(Errc::CorruptPayload, "not a model artifact");
  const std::string_view header = bytes.substr(0, end + 1);
  const std::size_t crc_line = header.rfind("header_crc32: ");
  if (crc_line == std::string_view::npos) fail(Errc::CorruptPayload, "header checksum missing");
  const std::string stored(header.substr(crc_line + 14, 8));
  if (stored != hex32(crc32(header.substr(0, crc_line)))) fail(Errc::CorruptPayload, "header checksum mismatch");

  std::map<std::string, std::string, std::less<>> fields;
  std::istringstream in{std::string(header.substr(0, crc_line))};
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto colon = line.find(": ");
    if (colon == std::string::npos) fail(Errc::CorruptPayload, "malformed header line '" + line + "'");
    fields[line.substr(0, colon)] = line.substr(colon + 2);
  }
  auto field = [&](const char* k) -> const std::string& {
    const auto it = fields.find(k);
    if (it == fields.end()) fail(Errc::CorruptPayload, std::string("header lacks '") + k + "'");
    return it->second;
  };

  ModelArtifact a;
  try {
    a.format_version = static_cast<std::uint32_t>(std::stoul(field("format_version")));
    a.fingerprint.training_rows = std::stoull(field("training_rows"));
    a.fingerprint.seed = std::stoull(field("seed"));
  } catch (const std::logic_error&) {
    fail(Errc::CorruptPayload, "malformed numeric header field");
  }
  if (a.format_version != kFormatVersion)
    fail(Errc::VersionMismatch, "artifact format version " + std::to_string(a.format_version) +
                                    ", this build reads version " + std::to_string(kFormatVersion));
  a.fingerprint.data_hash = field("data_hash");
  a.fingerprint.created = field("created");

  std::map<std::string, std::string_view> sections;
  auto rest = bytes.substr(end + 2);
  std::size_t pos = 0;
  while (pos < rest.size()) {
    Reader sr(rest.substr(pos));
    std::string tag;
    for (std::size_t i = 0; i < kSectionTag.size(); ++i) tag.push_back(static_cast<char>(sr.u8()));
    if (tag != kSectionTag) fail(Errc::CorruptPayload, "bad section tag");
    const std::string name = sr.str();
    const std::size_t len = sr.size();
    const std::uint32_t crc = sr.u32();
    const std::size_t head = kSectionTag.size() + 8 + name.size() + 8 + 4;
    if (rest.size() - pos - head < len) fail(Errc::CorruptPayload, "section '" + name + "' is truncated");
    const auto payload = rest.substr(pos + head, len);
    if (crc32(payload) != crc) fail(Errc::CorruptPayload, "checksum mismatch in section '" + name + "'");
    sections[name] = payload;
    pos += head + len;
  }
  if (!sections.count("schema") || !sections.count("model")) fail(Errc::CorruptPayload, "missing section");

  a.schema = get_schema(sections["schema"]);
  Reader mr(sections["model"]);
  const auto family = mr.u8();
  if (family == 0) a.model = get_classifier(mr);
  else if (family == 1) a.model = get_detector(mr);
  else fail(Errc::CorruptPayload, "unknown model family");
  if (!mr.done()) fail(Errc::CorruptPayload, "trailing bytes in model section");
  if (a.kind() != field("kind")) fail(Errc::CorruptPayload, "header kind disagrees with the payload");
  return a;
}

void save_artifact(const ModelArtifact& a, const std::filesystem::path& path) {
  const std::string bytes = serialize(a);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) fail(Errc::Io, "cannot write " + tmp);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) fail(Errc::Io, "write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

ModelArtifact load_artifact(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Errc::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return deserialize(ss.str());
}

std::vector<std::size_t> resolve_schema(const FeatureSchema& schema, std::span<const std::string> columns) {
  std::vector<std::size_t> idx;
  std::string missing;
  for (const auto& name : schema.names) {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) missing += (missing.empty() ? "" : ", ") + name;
    else idx.push_back(static_cast<std::size_t>(it - columns.begin()));
  }
  if (!missing.empty())
    fail(Errc::SchemaMismatch, "input lacks model columns: " + missing + " (model expects " +
                                   std::to_string(schema.names.size()) + ", input has " +
                                   std::to_string(columns.size()) + ")");
  return idx;
}

Matrix prepare_input(const FeatureSchema& schema, const data::FeatureMatrix& m) {
  const auto idx = resolve_schema(schema, m.column_names);
  Matrix x = m.values.select_cols(idx);
  if (schema.scaler) x = data::apply_scaler(*schema.scaler, x);
  return x;
}

std::string hash_training_data(const Matrix& x, std::span<const std::string> labels) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t shape[2] = {x.rows(), x.cols()};
  mix(shape, sizeof shape);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (double d : x.row(i)) {
      const auto bits = std::bit_cast<std::uint64_t>(d);
      mix(&bits, sizeof bits);
    }
  for (const auto& l : labels) mix(l.data(), l.size() + 1);
  char b[17];
  std::snprintf(b, sizeof b, "%016llx", static_cast<unsigned long long>(h));
  return b;
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char b[32];
  std::strftime(b, sizeof b, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return b;
}

}  // namespace zcam::persist
