#include "zcam/pipeline.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>

#include "zcam/error.hpp"
#include "zcam/flow_csv.hpp"
#include "zcam/gmm.hpp"
#include "zcam/pca.hpp"

namespace zcam {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path resolve_output_dir(const PipelineConfig& cfg) {
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("ZCAM_OUT_DIR"); env && *env) return env;
  return "zcam-out";
}

DirectoryLock::DirectoryLock(const fs::path& dir) {
  fs::create_directories(dir);
  const auto lock = dir / ".zcam.lock";
  fd_ = ::open(lock.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) fail(Errc::Io, "cannot open " + lock.string());
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    fail(Errc::Io, "output directory " + dir.string() + " is in use by another run");
  }
}

DirectoryLock::~DirectoryLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

InputSpec parse_input(const std::string& text) {
  InputSpec s;
  const auto colon = text.rfind(':');
  if (colon != std::string::npos && colon > 0 && text.find('/', colon) == std::string::npos &&
      colon + 1 < text.size()) {
    s.path = text.substr(0, colon);
    s.label = text.substr(colon + 1);
  } else {
    s.path = text;
  }
  return s;
}

bool is_pcap_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  unsigned char b[4] = {};
  if (!f.read(reinterpret_cast<char*>(b), 4)) return false;
  const std::uint32_t le = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  const std::uint32_t be = b[3] | (b[2] << 8) | (b[1] << 16) | (static_cast<std::uint32_t>(b[0]) << 24);
  for (std::uint32_t m : {0xa1b2c3d4u, 0xa1b23c4du, 0x0a0d0d0au})
    if (le == m || be == m) return true;
  return false;
}

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

template <class F>
auto stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), name + ": " + e.message());
  } catch (const fs::filesystem_error& e) {
    throw Error(Errc::Io, name + ": " + e.what());
  }
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) fail(Errc::Io, "cannot write " + p.string());
  return f;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

void write_meta_header(std::ostream& out, const data::FeatureMatrix& m) {
  if (!m.meta.empty()) out << "Flow ID,Src IP,Src Port,Dst IP,Dst Port,Protocol,Timestamp,";
  if (m.has_labels()) out << "Label,";
}

void write_meta_row(std::ostream& out, const data::FeatureMatrix& m, std::size_t i) {
  if (!m.meta.empty()) {
    const auto& r = m.meta[i];
    for (const auto* s : {&r.flow_id, &r.src_ip, &r.src_port, &r.dst_ip, &r.dst_port, &r.protocol, &r.timestamp})
      out << csv_field(*s) << ',';
  }
  if (m.has_labels()) out << csv_field(m.labels[i]) << ',';
}

std::string num(double v) { return flow::format_number(v); }

json decisions_summary(const data::FeatureMatrix& m, const std::vector<oc::Decision>& d) {
  json j;
  const std::size_t out = oc::count_outliers(d);
  j["rows"] = d.size();
  j["inliers"] = d.size() - out;
  j["outliers"] = out;
  if (m.has_labels()) {
    std::map<std::string, std::pair<std::size_t, std::size_t>> per;
    for (std::size_t i = 0; i < d.size(); ++i)
      (d[i] == oc::Decision::Outlier ? per[m.labels[i]].second : per[m.labels[i]].first) += 1;
    for (const auto& [label, c] : per) j["per_label"][label] = {{"inliers", c.first}, {"outliers", c.second}};
  }
  return j;
}

}  // namespace

json extract_to_csv(std::span<const InputSpec> pcaps, const flow::Timeouts& timeouts, const fs::path& out_csv) {
  std::vector<flow::FlowRecord> all;
  json stats = json::array();
  for (const auto& p : pcaps) {
    pcap::DecodeStats st;
    auto recs = flow::meter_capture(p.path, timeouts, p.label, &st);
    stats.push_back({{"file", p.path.filename().string()},
                     {"frames", st.frames},
                     {"packets", st.emitted},
                     {"skipped", st.skipped},
                     {"malformed", st.malformed},
                     {"truncated", st.truncated},
                     {"flows", recs.size()}});
    for (auto& r : recs) all.push_back(std::move(r));
  }
  // Flow IDs stay unique across files.
  for (std::size_t i = 0; i < all.size(); ++i) all[i].flow_id = i;
  if (out_csv.has_parent_path()) fs::create_directories(out_csv.parent_path());
  auto f = open_out(out_csv);
  flow::write_csv(f, all);
  return {{"captures", stats}, {"flows", all.size()}};
}

data::FeatureMatrix load_inputs(const PipelineConfig& cfg, const std::optional<fs::path>& out_dir, json* report) {
  if (cfg.inputs.empty()) fail(Errc::Usage, "no inputs given");
  std::vector<InputSpec> pcaps;
  std::vector<fs::path> csvs;
  for (const auto& text : cfg.inputs) {
    InputSpec s = parse_input(text);
    if (!fs::exists(s.path) && fs::exists(text)) s = {text, std::nullopt};
    if (!fs::exists(s.path)) fail(Errc::Io, "input not found: " + text);
    if (is_pcap_file(s.path)) pcaps.push_back(std::move(s));
    else csvs.push_back(s.path);
  }
  if (!pcaps.empty()) {
    const fs::path csv = out_dir ? *out_dir / "flows.csv" : fs::temp_directory_path() / "zcam-flows.csv";
    json st = extract_to_csv(pcaps, cfg.timeouts, csv);
    if (report) (*report)["extract"] = st;
    csvs.insert(csvs.begin(), csv);
  }
  return data::load_records(csvs);
}

Prepared prepare(const data::FeatureMatrix& all, const PipelineConfig& cfg, bool split, std::uint64_t seed) {
  Prepared p;
  data::FeatureMatrix base = cfg.prune ? data::prune_constant(all) : all;
  if (split) {
    auto [tr, te] = data::split(base, cfg.test_fraction, seed);
    p.train = std::move(tr);
    p.test = std::move(te);
  } else {
    p.train = std::move(base);
    p.test = p.train.select_rows(std::vector<std::size_t>{});
  }

  if (cfg.top_k > 0 && cfg.top_k < p.train.cols()) {
    if (!cfg.ranking_file.empty()) {
      std::ifstream in(cfg.ranking_file);
      if (!in) fail(Errc::Io, "cannot read ranking " + cfg.ranking_file);
      p.ranking = data::read_ranking(in);
    } else {
      p.ranking = data::rank_features(p.train, cfg.ranking_trees, seed);
    }
    p.train = data::select_top_k(p.train, p.ranking, cfg.top_k);
    p.test = data::select_top_k(p.test, p.ranking, cfg.top_k);
  }

  p.schema.names = p.train.column_names;
  if (cfg.scale) {
    const std::vector<data::FeatureMatrix> others{p.test};
    auto scaled = data::fit_apply_scaler(p.train, others);
    p.train = std::move(scaled.train);
    p.test = std::move(scaled.others.front());
    p.schema.scaler = scaled.params;
  }
  return p;
}

persist::ModelArtifact train_artifact(const Prepared& p, const PipelineConfig& cfg, std::uint64_t seed,
                                      double* train_seconds) {
  persist::ModelArtifact a;
  a.schema = p.schema;
  a.fingerprint.seed = seed;
  a.fingerprint.created = persist::utc_timestamp();
  const auto t0 = Clock::now();
  if (const auto kind = ml::parse_classifier_kind(cfg.model)) {
    if (!p.train.has_labels()) fail(Errc::SingleClass, "supervised training needs labels");
    auto params = cfg.classifier;
    params.seed = seed;
    a.model = ml::train_classifier(*kind, p.train.values, p.train.labels, params);
    a.fingerprint.training_rows = p.train.rows();
    a.fingerprint.data_hash = persist::hash_training_data(p.train.values, p.train.labels);
  } else {
    data::FeatureMatrix rows = p.train;
    if (!cfg.train_labels.empty()) {
      if (!rows.has_labels()) fail(Errc::MissingDataset, "train_labels given but the input has no labels");
      std::vector<std::size_t> keep;
      const std::set<std::string> wanted(cfg.train_labels.begin(), cfg.train_labels.end());
      for (std::size_t i = 0; i < rows.rows(); ++i)
        if (wanted.count(rows.labels[i])) keep.push_back(i);
      rows = rows.select_rows(keep);
      if (rows.rows() == 0) fail(Errc::MissingDataset, "no training rows carry the requested labels");
    }
    a.model = oc::train_detector(oc::parse_detector_kind(cfg.model), rows.values, cfg.detector, seed);
    a.fingerprint.training_rows = rows.rows();
    a.fingerprint.data_hash = persist::hash_training_data(rows.values, rows.labels);
  }
  if (train_seconds) *train_seconds = since(t0);
  return a;
}

json to_json(const eval::Metrics& m) {
  json j;
  j["accuracy"] = m.accuracy;
  j["macro_precision"] = m.macro_precision;
  j["macro_recall"] = m.macro_recall;
  j["macro_f1"] = m.macro_f1;
  if (m.positive) {
    j["positive"] = *m.positive;
    j["tpr"] = m.tpr;
    j["fpr"] = m.fpr;
  }
  j["zero_division"] = m.zero_division;
  for (const auto& c : m.per_class)
    j["per_class"][c.label] = {{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}};
  j["confusion"] = {{"labels", m.confusion.labels}, {"counts", m.confusion.counts}};
  return j;
}

json to_json(const eval::Curves& c) { return {{"auc", c.auc}, {"auprc", c.auprc}, {"roc_points", c.roc.size()}}; }

json to_json(const eval::ScenarioReport& r) {
  json j;
  j["kind"] = eval::scenario_name(r.kind);
  j["trained_on"] = r.trained_on;
  j["tested_on"] = r.tested_on;
  j["seeds"] = r.seeds;
  for (const auto& m : r.models) {
    json jm;
    jm["model"] = oc::detector_name(m.kind);
    jm["train_accuracy"] = {{"mean", m.train_accuracy.mean}, {"std", m.train_accuracy.stddev}};
    jm["test_accuracy"] = {{"mean", m.test_accuracy.mean}, {"std", m.test_accuracy.stddev}};
    for (const auto& s : m.seeds) {
      json js;
      js["seed"] = s.seed;
      js["train_rows"] = s.train_rows;
      js["train_inliers"] = s.train_inliers;
      js["train_accuracy"] = s.train_accuracy;
      js["test_accuracy"] = s.test_accuracy;
      js["test_inliers"] = s.test_inliers;
      js["test_outliers"] = s.test_outliers;
      for (const auto& o : s.sets)
        js["sets"].push_back({{"name", o.name},
                              {"expect", o.expect_outlier ? "outlier" : "inlier"},
                              {"rows", o.rows},
                              {"inliers", o.inliers},
                              {"outliers", o.outliers},
                              {"accuracy", o.accuracy}});
      js["timing"] = {{"train_seconds", s.train_seconds}, {"predict_seconds", s.predict_seconds}};
      jm["seeds"].push_back(std::move(js));
    }
    j["models"].push_back(std::move(jm));
  }
  return j;
}

json config_json(const PipelineConfig& cfg) {
  json j = json::object();
  for (const auto& [k, v] : config_entries(cfg)) j[k] = v;
  return j;
}

void write_json(const fs::path& path, const json& j) {
  auto f = open_out(path);
  f << j.dump(2) << '\n';
}

void write_curves_csv(const fs::path& dir, const std::string& stem, const eval::Curves& c) {
  auto roc = open_out(dir / (stem + "_roc.csv"));
  roc << "fpr,tpr\n";
  for (const auto& p : c.roc) roc << num(p.x) << ',' << num(p.y) << '\n';
  auto pr = open_out(dir / (stem + "_pr.csv"));
  pr << "recall,precision\n";
  for (const auto& p : c.pr) pr << num(p.x) << ',' << num(p.y) << '\n';
}

namespace {

void run_task(const PipelineConfig& cfg, const fs::path& dir, PipelineResult& res) {
  json& rep = res.report;
  json& timing = rep["timing"];
  auto file = [&](const std::string& name) {
    res.files.push_back(dir / name);
    return dir / name;
  };

  auto t0 = Clock::now();
  if (cfg.task == "extract") {
    std::vector<InputSpec> pcaps;
    for (const auto& s : cfg.inputs) pcaps.push_back(parse_input(s));
    rep["extract"] = stage("extract", [&] { return extract_to_csv(pcaps, cfg.timeouts, file("flows.csv")); });
    timing["extract_seconds"] = since(t0);
    return;
  }

  const data::FeatureMatrix all = stage("load", [&] { return load_inputs(cfg, dir, &rep); });
  if (fs::exists(dir / "flows.csv")) res.files.push_back(dir / "flows.csv");
  rep["input"] = {{"rows", all.rows()}, {"columns", all.cols()}, {"dropped_rows", all.dropped_rows}};
  timing["load_seconds"] = since(t0);
  const std::uint64_t seed = cfg.seeds.front();

  if (cfg.task == "classify" || cfg.task == "detect") {
    const bool supervised = ml::parse_classifier_kind(cfg.model).has_value();
    persist::ModelArtifact art;
    data::FeatureMatrix eval_rows;
    Matrix x;
    if (!cfg.model_file.empty()) {
      art = stage("load-model", [&] { return persist::load_artifact(cfg.model_file); });
      eval_rows = all;
      x = stage("prepare", [&] { return persist::prepare_input(art.schema, all); });
    } else {
      t0 = Clock::now();
      const Prepared p = stage("prepare", [&] { return prepare(all, cfg, true, seed); });
      timing["prepare_seconds"] = since(t0);
      if (!p.ranking.entries.empty()) {
        auto f = open_out(file("ranking.csv"));
        data::write_ranking(f, p.ranking);
      }
      double train_s = 0.0;
      art = stage("train", [&] { return train_artifact(p, cfg, seed, &train_s); });
      timing["train_seconds"] = train_s;
      stage("save-model", [&] {
        persist::save_artifact(art, file("model.zcam"));
        return 0;
      });
      eval_rows = p.test;
      x = p.test.values;
    }
    rep["model"] = {{"kind", art.kind()}, {"features", art.schema.names}, {"training_rows", art.fingerprint.training_rows}};

    t0 = Clock::now();
    if (const auto* clf = std::get_if<ml::Classifier>(&art.model)) {
      if (!supervised && cfg.model_file.empty()) fail(Errc::InvalidArgument, "model kind mismatch");
      const auto proba = stage("predict", [&] { return ml::predict_proba(*clf, x); });
      const auto idx = ml::argmax_rows(proba);
      timing["predict_seconds"] = since(t0);
      auto f = open_out(file("predictions.csv"));
      write_meta_header(f, eval_rows);
      f << "Predicted\n";
      std::vector<std::string> pred;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        pred.push_back(clf->classes[static_cast<std::size_t>(idx[i])]);
        write_meta_row(f, eval_rows, i);
        f << csv_field(pred.back()) << '\n';
      }
      if (eval_rows.has_labels() && !pred.empty()) {
        const std::optional<std::string> pos =
            cfg.positive_label.empty() ? std::nullopt : std::optional<std::string>(cfg.positive_label);
        const auto m = stage("evaluate", [&] { return eval::compute_metrics(eval_rows.labels, pred, pos); });
        rep["metrics"] = to_json(m);
        for (const auto& [truth, row] : eval::misclassification_table(m.confusion))
          for (const auto& [p, pct] : row) rep["misclassification"][truth][p] = pct;
        if (pos) {
          const auto it = std::find(clf->classes.begin(), clf->classes.end(), *pos);
          if (it != clf->classes.end()) {
            std::vector<double> score;
            const auto c = static_cast<std::size_t>(it - clf->classes.begin());
            for (std::size_t i = 0; i < proba.rows(); ++i) score.push_back(proba(i, c));
            try {
              const auto curves = eval::roc_pr_curves(eval_rows.labels, score, *pos);
              rep["curves"] = to_json(curves);
              write_curves_csv(dir, "curves", curves);
              res.files.push_back(dir / "curves_roc.csv");
              res.files.push_back(dir / "curves_pr.csv");
            } catch (const Error& e) {
              if (e.code() != Errc::SingleClass) throw;
            }
          }
        }
      }
    } else {
      const auto& det = std::get<oc::Detector>(art.model);
      const auto scores = stage("detect", [&] { return oc::anomaly_scores(det, x); });
      const auto dec = stage("detect", [&] { return oc::decide(det, x); });
      timing["predict_seconds"] = since(t0);
      auto f = open_out(file("decisions.csv"));
      write_meta_header(f, eval_rows);
      f << "Score,Decision\n";
      for (std::size_t i = 0; i < dec.size(); ++i) {
        write_meta_row(f, eval_rows, i);
        f << num(scores[i]) << ',' << (dec[i] == oc::Decision::Outlier ? "outlier" : "inlier") << '\n';
      }
      rep["decisions"] = decisions_summary(eval_rows, dec);
    }
    return;
  }

  if (cfg.task == "scenario") {
    PipelineConfig c2 = cfg;
    c2.scale = false;  // each scenario standardizes on its own training rows
    t0 = Clock::now();
    const Prepared p = stage("prepare", [&] { return prepare(all, c2, false, seed); });
    timing["prepare_seconds"] = since(t0);
    if (!p.train.has_labels()) fail(Errc::MissingDataset, "scenario inputs need labels");
    eval::ScenarioInputs in;
    std::set<std::string> labels(p.train.labels.begin(), p.train.labels.end());
    for (const auto& l : labels) {
      eval::NamedSet s{l, p.train.with_label(l).values};
      if (l == cfg.others_label) in.others = std::move(s);
      else in.cameras.push_back(std::move(s));
    }
    eval::ScenarioOptions opt;
    opt.detectors.clear();
    for (const auto& m : cfg.scenario_models) opt.detectors.push_back(oc::parse_detector_kind(m));
    opt.params = cfg.detector;
    opt.seeds = cfg.seeds;
    opt.test_fraction = cfg.test_fraction;
    opt.scale = cfg.scale;
    t0 = Clock::now();
    const auto reports = stage("scenario", [&] { return eval::run_zero_day_scenario(cfg.scenario, in, opt); });
    timing["scenario_seconds"] = since(t0);
    rep["features"] = p.train.column_names;
    for (const auto& r : reports) rep["scenarios"].push_back(to_json(r));
    return;
  }

  if (cfg.task == "decompose") {
    t0 = Clock::now();
    const Prepared p = stage("prepare", [&] { return prepare(all, cfg, false, seed); });
    timing["prepare_seconds"] = since(t0);
    const auto& d = cfg.decomposition;
    t0 = Clock::now();
    const auto pca = stage("pca", [&] { return decomp::fit_pca(p.train.values, d.pca_components); });
    const auto pca_out = decomp::pca_outliers(pca, p.train.values, d.percentile);
    const auto gmm = stage("gmm", [&] {
      return decomp::fit_gmm(p.train.values, d.gmm_components, d.gmm_covariance, seed, d.gmm);
    });
    const auto gmm_out = decomp::gmm_outliers(gmm, p.train.values, d.percentile);
    const auto sweep = stage("bic", [&] { return decomp::bic_sweep(p.train.values, d.bic_k_max, seed, d.gmm); });
    timing["decompose_seconds"] = since(t0);

    auto bf = open_out(file("bic.csv"));
    bf << "k,cov_type,bic\n";
    for (const auto& e : sweep.grid) bf << e.k << ',' << decomp::covariance_name(e.type) << ',' << num(e.bic) << '\n';
    auto of = open_out(file("outliers.csv"));
    write_meta_header(of, p.train);
    of << "pca_error,pca_outlier,gmm_log_density,gmm_outlier\n";
    std::size_t both = 0;
    for (std::size_t i = 0; i < p.train.rows(); ++i) {
      write_meta_row(of, p.train, i);
      const bool a = pca_out.flags[i] == oc::Decision::Outlier, b = gmm_out.flags[i] == oc::Decision::Outlier;
      both += (a && b) ? 1 : 0;
      of << num(pca_out.scores[i]) << ',' << (a ? 1 : 0) << ',' << num(gmm_out.scores[i]) << ',' << (b ? 1 : 0) << '\n';
    }
    rep["pca"] = {{"components", pca.k()},
                  {"explained_variance", pca.explained_variance},
                  {"threshold", pca_out.threshold},
                  {"outliers", oc::count_outliers(pca_out.flags)}};
    rep["gmm"] = {{"components", gmm.components()},
                  {"covariance", decomp::covariance_name(gmm.type)},
                  {"log_likelihood", gmm.log_likelihood},
                  {"iterations", gmm.iterations},
                  {"converged", gmm.converged},
                  {"threshold", gmm_out.threshold},
                  {"outliers", oc::count_outliers(gmm_out.flags)}};
    rep["both_flagged"] = both;
    rep["bic_best"] = {{"k", sweep.argmin().k}, {"cov_type", decomp::covariance_name(sweep.argmin().type)}};
    return;
  }
  fail(Errc::Usage, "unknown task '" + cfg.task + "'");
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  PipelineResult res;
  res.report["task"] = cfg.task;
  res.report["config"] = config_json(cfg);
  try {
    const fs::path dir = resolve_output_dir(cfg);
    DirectoryLock lock(dir);
    const auto t0 = Clock::now();
    run_task(cfg, dir, res);
    res.report["timing"]["total_seconds"] = since(t0);
    std::vector<std::string> names;
    for (const auto& f : res.files) names.push_back(f.filename().string());
    res.report["files"] = names;
    write_json(dir / "report.json", res.report);
    res.files.push_back(dir / "report.json");
  } catch (const Error& e) {
    res.status = exit_status(e.code());
    res.error = e.what();
  } catch (const std::exception& e) {
    res.status = 2;
    res.error = e.what();
  }
  return res;
}

}  // namespace zcam
