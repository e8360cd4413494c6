#include "zcam/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "zcam/error.hpp"
#include "zcam/flow_csv.hpp"

namespace zcam {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
  return s;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* want) {
  fail(Errc::Usage, "config key '" + key + "': '" + value + "' is not " + want);
}

template <class T>
T parse_int(const std::string& key, const std::string& v) {
  T out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v, "a finite number");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

std::string num(double v) { return flow::format_number(v); }

struct Entry {
  const char* key;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const std::string&, const std::string&)> set;
};

#define ZCAM_INT(KEY, FIELD)                                                       \
  Entry{KEY, [](const PipelineConfig& c) { return std::to_string(c.FIELD); },      \
        [](PipelineConfig& c, const std::string& k, const std::string& v) {        \
          c.FIELD = parse_int<std::decay_t<decltype(c.FIELD)>>(k, v);              \
        }}
#define ZCAM_REAL(KEY, FIELD)                                                      \
  Entry{KEY, [](const PipelineConfig& c) { return num(c.FIELD); },                 \
        [](PipelineConfig& c, const std::string& k, const std::string& v) { c.FIELD = parse_real(k, v); }}
#define ZCAM_BOOL(KEY, FIELD)                                                      \
  Entry{KEY, [](const PipelineConfig& c) { return std::string(c.FIELD ? "true" : "false"); }, \
        [](PipelineConfig& c, const std::string& k, const std::string& v) { c.FIELD = parse_bool(k, v); }}
#define ZCAM_STR(KEY, FIELD)                                                       \
  Entry{KEY, [](const PipelineConfig& c) { return c.FIELD; },                      \
        [](PipelineConfig& c, const std::string&, const std::string& v) { c.FIELD = v; }}
#define ZCAM_LIST(KEY, FIELD)                                                      \
  Entry{KEY, [](const PipelineConfig& c) { return join(c.FIELD); },                \
        [](PipelineConfig& c, const std::string&, const std::string& v) { c.FIELD = split_list(v); }}
// Timeouts are configured in seconds and stored in microseconds.
#define ZCAM_SECONDS(KEY, FIELD)                                                   \
  Entry{KEY, [](const PipelineConfig& c) { return num(static_cast<double>(c.FIELD) / 1e6); }, \
        [](PipelineConfig& c, const std::string& k, const std::string& v) {        \
          const double s = parse_real(k, v);                                       \
          if (s < 0) bad_value(k, v, "a non-negative duration");                   \
          c.FIELD = static_cast<std::int64_t>(std::llround(s * 1e6));              \
        }}

const std::vector<Entry>& table() {
  static const std::vector<Entry> t = {
      Entry{"task", [](const PipelineConfig& c) { return c.task; },
            [](PipelineConfig& c, const std::string& k, const std::string& v) {
              if (v != "extract" && v != "classify" && v != "detect" && v != "scenario" && v != "decompose")
                bad_value(k, v, "one of extract, classify, detect, scenario, decompose");
              c.task = v;
            }},
      ZCAM_LIST("inputs", inputs),
      ZCAM_STR("output_dir", output_dir),
      ZCAM_SECONDS("flow.timeout_s", timeouts.flow_us),
      ZCAM_SECONDS("flow.idle_s", timeouts.idle_us),
      ZCAM_SECONDS("flow.activity_s", timeouts.activity_us),
      ZCAM_BOOL("prune", prune),
      ZCAM_BOOL("scale", scale),
      ZCAM_INT("top_k", top_k),
      ZCAM_STR("ranking_file", ranking_file),
      ZCAM_INT("ranking_trees", ranking_trees),
      ZCAM_REAL("test_fraction", test_fraction),
      Entry{"seeds",
            [](const PipelineConfig& c) {
              std::string s;
              for (auto x : c.seeds) s += (s.empty() ? "" : ",") + std::to_string(x);
              return s;
            },
            [](PipelineConfig& c, const std::string& k, const std::string& v) {
              c.seeds.clear();
              for (const auto& x : split_list(v)) c.seeds.push_back(parse_int<std::uint64_t>(k, x));
              if (c.seeds.empty()) bad_value(k, v, "a non-empty seed list");
            }},
      Entry{"model", [](const PipelineConfig& c) { return c.model; },
            [](PipelineConfig& c, const std::string& k, const std::string& v) {
              if (!ml::parse_classifier_kind(v) && !oc::is_detector_name(v))
                bad_value(k, v, "a known model (cart, rf, et, gbt, knn, gnb, lsvm, ocsvm, sgdocsvm, iforest, deepsvdd)");
              c.model = v;
            }},
      ZCAM_STR("model_file", model_file),
      ZCAM_STR("others_label", others_label),
      ZCAM_LIST("train_labels", train_labels),
      ZCAM_STR("positive_label", positive_label),
      Entry{"scenario", [](const PipelineConfig& c) { return std::string(eval::scenario_name(c.scenario)); },
            [](PipelineConfig& c, const std::string&, const std::string& v) {
              c.scenario = eval::parse_scenario_kind(v);
            }},
      Entry{"scenario.models", [](const PipelineConfig& c) { return join(c.scenario_models); },
            [](PipelineConfig& c, const std::string& k, const std::string& v) {
              auto list = split_list(v);
              for (const auto& m : list)
                if (!oc::is_detector_name(m)) bad_value(k, m, "a one-class model name");
              c.scenario_models = std::move(list);
            }},
      // supervised
      ZCAM_INT("trees.n", classifier.n_trees),
      Entry{"trees.max_depth",
            [](const PipelineConfig& c) { return std::to_string(c.classifier.max_depth.value_or(0)); },
            [](PipelineConfig& c, const std::string& k, const std::string& v) {
              const auto d = parse_int<std::size_t>(k, v);
              c.classifier.max_depth = d ? std::optional<std::size_t>(d) : std::nullopt;
            }},
      ZCAM_INT("trees.min_leaf", classifier.min_leaf),
      ZCAM_INT("gbt.rounds", classifier.gbt.n_rounds),
      ZCAM_REAL("gbt.learning_rate", classifier.gbt.learning_rate),
      Entry{"gbt.max_depth",
            [](const PipelineConfig& c) { return std::to_string(c.classifier.gbt.max_depth.value_or(0)); },
            [](PipelineConfig& c, const std::string& k, const std::string& v) {
              const auto d = parse_int<std::size_t>(k, v);
              c.classifier.gbt.max_depth = d ? std::optional<std::size_t>(d) : std::nullopt;
            }},
      ZCAM_INT("knn.k", classifier.knn_k),
      ZCAM_REAL("gnb.var_floor_ratio", classifier.gnb_floor_ratio),
      ZCAM_REAL("lsvm.l2", classifier.svm.l2),
      ZCAM_INT("lsvm.epochs", classifier.svm.epochs),
      ZCAM_REAL("lsvm.learning_rate", classifier.svm.learning_rate),
      // one-class
      ZCAM_REAL("ocsvm.nu", detector.ocsvm.nu),
      ZCAM_REAL("ocsvm.gamma", detector.ocsvm.gamma),
      ZCAM_REAL("ocsvm.tol", detector.ocsvm.tol),
      ZCAM_INT("ocsvm.cache_mb", detector.ocsvm.cache_mb),
      ZCAM_REAL("sgdocsvm.nu", detector.sgd.nu),
      ZCAM_REAL("sgdocsvm.eta0", detector.sgd.eta0),
      ZCAM_INT("sgdocsvm.epochs", detector.sgd.epochs),
      ZCAM_REAL("sgdocsvm.gamma", detector.sgd.gamma),
      ZCAM_INT("sgdocsvm.components", detector.sgd.components),
      ZCAM_INT("iforest.trees", detector.iforest.n_trees),
      ZCAM_INT("iforest.max_samples", detector.iforest.max_samples),
      ZCAM_REAL("iforest.contamination", detector.iforest.contamination),
      ZCAM_REAL("deepsvdd.learning_rate", detector.deep.learning_rate),
      ZCAM_INT("deepsvdd.epochs", detector.deep.epochs),
      ZCAM_INT("deepsvdd.batch_size", detector.deep.batch_size),
      Entry{"deepsvdd.hidden",
            [](const PipelineConfig& c) {
              std::string s;
              for (auto h : c.detector.deep.hidden) s += (s.empty() ? "" : ",") + std::to_string(h);
              return s;
            },
            [](PipelineConfig& c, const std::string& k, const std::string& v) {
              c.detector.deep.hidden.clear();
              for (const auto& x : split_list(v)) c.detector.deep.hidden.push_back(parse_int<std::size_t>(k, x));
            }},
      ZCAM_INT("deepsvdd.latent", detector.deep.latent),
      ZCAM_REAL("deepsvdd.percentile", detector.deep.percentile),
      ZCAM_BOOL("deepsvdd.soft_boundary", detector.deep.soft_boundary),
      ZCAM_REAL("deepsvdd.nu", detector.deep.nu),
      ZCAM_REAL("deepsvdd.center_eps", detector.deep.center_eps),
      // decomposition
      ZCAM_INT("pca.components", decomposition.pca_components),
      ZCAM_REAL("decomp.percentile", decomposition.percentile),
      ZCAM_INT("gmm.components", decomposition.gmm_components),
      Entry{"gmm.covariance",
            [](const PipelineConfig& c) { return std::string(decomp::covariance_name(c.decomposition.gmm_covariance)); },
            [](PipelineConfig& c, const std::string&, const std::string& v) {
              c.decomposition.gmm_covariance = decomp::parse_covariance_type(v);
            }},
      ZCAM_INT("gmm.k_max", decomposition.bic_k_max),
      ZCAM_INT("gmm.max_iter", decomposition.gmm.max_iter),
      ZCAM_REAL("gmm.tol", decomposition.gmm.tol),
  };
  return t;
}

}  // namespace

void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  const auto& t = table();
  const auto it = std::find_if(t.begin(), t.end(), [&](const Entry& e) { return key == e.key; });
  if (it == t.end()) fail(Errc::Usage, "unknown config key '" + key + "'");
  it->set(cfg, key, trim(value));
}

void apply_config_text(PipelineConfig& cfg, std::istream& in, const std::string& origin) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(Errc::Usage, origin + ":" + std::to_string(lineno) + ": expected key = value");
    apply_setting(cfg, trim(std::string_view(line).substr(0, eq)), line.substr(eq + 1));
  }
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::Io, "cannot read config " + path.string());
  PipelineConfig cfg;
  apply_config_text(cfg, in, path.string());
  return cfg;
}

std::vector<std::pair<std::string, std::string>> config_entries(const PipelineConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : table()) out.emplace_back(e.key, e.get(cfg));
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& e : table()) out.emplace_back(e.key);
  return out;
}

}  // namespace zcam
