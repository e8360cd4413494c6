// zcam: command-line front end for the flow toolkit.

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "zcam/config.hpp"
#include "zcam/error.hpp"
#include "zcam/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::string config_file;
  std::vector<std::string> sets;
  std::string out_dir;
  std::vector<std::uint64_t> seeds;
};

zcam::PipelineConfig base_config(const Globals& g) {
  zcam::PipelineConfig cfg = g.config_file.empty() ? zcam::PipelineConfig{} : zcam::load_config(g.config_file);
  for (const auto& s : g.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) zcam::fail(zcam::Errc::Usage, "--set expects key=value, got '" + s + "'");
    zcam::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (!g.out_dir.empty()) cfg.output_dir = g.out_dir;
  if (!g.seeds.empty()) cfg.seeds = g.seeds;
  return cfg;
}

int finish(const zcam::PipelineResult& r) {
  if (r.status != 0) {
    std::cerr << "zcam: " << r.error << '\n';
    return r.status;
  }
  for (const auto& f : r.files) std::cout << f.string() << '\n';
  return 0;
}

fs::path out_path(const zcam::PipelineConfig& cfg, const std::string& given, const char* fallback) {
  if (!given.empty()) return given;
  const auto dir = zcam::resolve_output_dir(cfg);
  fs::create_directories(dir);
  return dir / fallback;
}

void print_report(const json& r, std::ostream& os) {
  os << "task: " << r.value("task", "?") << '\n';
  if (r.contains("input")) os << "input rows: " << r["input"].value("rows", 0) << '\n';
  if (r.contains("model")) os << "model: " << r["model"].value("kind", "?") << '\n';
  if (r.contains("metrics")) {
    os << std::fixed << std::setprecision(4) << "accuracy: " << r["metrics"]["accuracy"].get<double>() << '\n';
    if (r["metrics"].contains("per_class"))
      for (const auto& [label, m] : r["metrics"]["per_class"].items())
        os << "  " << label << ": precision " << m["precision"].get<double>() << ", recall "
           << m["recall"].get<double>() << ", f1 " << m["f1"].get<double>() << '\n';
  }
  if (r.contains("evaluation"))
    for (const auto& e : r["evaluation"])
      os << std::fixed << std::setprecision(4) << "  " << std::setw(5) << e["model"].get<std::string>()
         << "  accuracy " << e["metrics"]["accuracy"].get<double>() << "  train "
         << e["timing"]["train_seconds"].get<double>() << " s  predict " << e["timing"]["predict_seconds"].get<double>()
         << " s\n";
  if (r.contains("decisions"))
    os << "inliers: " << r["decisions"]["inliers"] << ", outliers: " << r["decisions"]["outliers"] << '\n';
  if (r.contains("scenarios"))
    for (const auto& s : r["scenarios"]) {
      os << s["kind"].get<std::string>() << " trained on " << s["trained_on"].get<std::string>() << '\n';
      for (const auto& m : s["models"])
        os << std::fixed << std::setprecision(2) << "  " << std::setw(9) << m["model"].get<std::string>() << "  train "
           << 100 * m["train_accuracy"]["mean"].get<double>() << "% +- " << 100 * m["train_accuracy"]["std"].get<double>()
           << "  test " << 100 * m["test_accuracy"]["mean"].get<double>() << "% +- "
           << 100 * m["test_accuracy"]["std"].get<double>() << '\n';
    }
  if (r.contains("timing"))
    for (const auto& [k, v] : r["timing"].items())
      if (v.is_number()) os << std::setprecision(3) << k << ": " << v.get<double>() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flow-based IoT camera identification and zero-day detection"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_file, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--set", g.sets, "override one config key (key=value); repeatable");
  app.add_option("--out-dir", g.out_dir, "output directory (default: $ZCAM_OUT_DIR or ./zcam-out)");
  app.add_option("--seed", g.seeds, "seed(s); the first one drives splits and single runs");

  std::vector<std::string> inputs;
  std::string out, model, model_file, kind, ranking, positive;
  std::vector<std::string> train_labels, models;
  std::size_t top_k = 0, trees = 100;
  bool prune = false, scale = false;

  auto* extract = app.add_subcommand("extract", "meter pcaps into a flow CSV");
  extract->add_option("pcaps", inputs, "capture files, optionally path:Label")->required();
  extract->add_option("--out", out, "CSV path (default <out-dir>/flows.csv)");

  auto* prep = app.add_subcommand("prep", "prune, select and scale a flow CSV");
  prep->add_option("--input", inputs)->required();
  prep->add_option("--out", out, "CSV path (default <out-dir>/prepared.csv)");
  prep->add_flag("--prune", prune, "drop constant columns");
  prep->add_flag("--scale", scale, "standardize columns");
  prep->add_option("--select-top", top_k, "keep the K top-ranked features");
  prep->add_option("--ranking", ranking, "ranking CSV (default: rank the input)");

  auto* rank = app.add_subcommand("rank", "Extra-Trees feature ranking");
  rank->add_option("--input", inputs)->required();
  rank->add_option("--out", out, "CSV path (default <out-dir>/ranking.csv)");
  rank->add_option("--trees", trees, "number of trees");

  auto* train = app.add_subcommand("train", "train one model on all input rows and save it");
  train->add_option("--model", model, "cart|rf|et|gbt|knn|gnb|lsvm|ocsvm|sgdocsvm|iforest|deepsvdd")->required();
  train->add_option("--input", inputs)->required();
  train->add_option("--out", out, "artifact path (default <out-dir>/model.zcam)");
  train->add_option("--train-label", train_labels, "one-class models: train only on rows with these labels");

  auto* detect = app.add_subcommand("detect", "inlier/outlier decisions from a saved one-class model");
  detect->add_option("--model-file", model_file)->required()->check(CLI::ExistingFile);
  detect->add_option("--input", inputs)->required();

  auto* classify = app.add_subcommand("classify", "predictions from a saved classifier");
  classify->add_option("--model-file", model_file)->required()->check(CLI::ExistingFile);
  classify->add_option("--input", inputs)->required();
  classify->add_option("--positive", positive, "positive label for TPR/FPR and curves");

  auto* scenario = app.add_subcommand("scenario", "zero-day experiment protocols");
  scenario->add_option("--kind", kind, "all-zero-day|all-but-one|only-one")->required();
  scenario->add_option("--input", inputs)->required();
  scenario->add_option("--models", models, "one-class models to run (default all four)")->delimiter(',');

  auto* evaluate = app.add_subcommand("evaluate", "train/test evaluation of supervised models");
  evaluate->add_option("--input", inputs)->required();
  evaluate->add_option("--models", models, "classifiers to run (default all seven)")->delimiter(',');
  evaluate->add_option("--positive", positive, "positive label for TPR/FPR and curves");

  auto* decompose = app.add_subcommand("decompose", "PCA / GMM outliers and BIC sweep");
  decompose->add_option("--input", inputs)->required();

  std::vector<std::string> reports;
  auto* report = app.add_subcommand("report", "summarize report.json files");
  report->add_option("reports", reports)->required()->check(CLI::ExistingFile);

  auto* run = app.add_subcommand("run", "run the task named in the config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    zcam::PipelineConfig cfg = base_config(g);
    if (!inputs.empty()) cfg.inputs = inputs;

    if (*extract) {
      if (!out.empty()) {
        std::vector<zcam::InputSpec> specs;
        for (const auto& s : inputs) specs.push_back(zcam::parse_input(s));
        const json st = zcam::extract_to_csv(specs, cfg.timeouts, out);
        std::cout << out << " (" << st["flows"] << " flows)\n";
        return 0;
      }
      cfg.task = "extract";
      return finish(zcam::run_pipeline(cfg));
    }
    if (*prep) {
      cfg.prune = prune;
      cfg.scale = scale;
      cfg.top_k = top_k;
      if (!ranking.empty()) cfg.ranking_file = ranking;
      const auto all = zcam::load_inputs(cfg, std::nullopt);
      const auto p = zcam::prepare(all, cfg, false, cfg.seeds.front());
      const auto path = out_path(cfg, out, "prepared.csv");
      std::ofstream f(path);
      zcam::data::write_csv(f, p.train);
      if (p.schema.scaler) {
        json s = {{"columns", p.schema.names}, {"mean", p.schema.scaler->mean}, {"stddev", p.schema.scaler->stddev}};
        zcam::write_json(fs::path(path).replace_extension(".scaler.json"), s);
      }
      std::cout << path.string() << " (" << p.train.rows() << " rows, " << p.train.cols() << " features)\n";
      return 0;
    }
    if (*rank) {
      const auto all = zcam::load_inputs(cfg, std::nullopt);
      const auto base = cfg.prune ? zcam::data::prune_constant(all) : all;
      const auto r = zcam::data::rank_features(base, trees, cfg.seeds.front());
      const auto path = out_path(cfg, out, "ranking.csv");
      std::ofstream f(path);
      zcam::data::write_ranking(f, r);
      for (std::size_t i = 0; i < std::min<std::size_t>(10, r.entries.size()); ++i)
        std::cout << std::setw(2) << i + 1 << "  " << std::left << std::setw(28) << r.entries[i].first << std::right
                  << std::setprecision(4) << r.entries[i].second << '\n';
      std::cout << path.string() << '\n';
      return 0;
    }
    if (*train) {
      zcam::apply_setting(cfg, "model", model);
      cfg.train_labels = train_labels;
      const auto all = zcam::load_inputs(cfg, std::nullopt);
      const auto p = zcam::prepare(all, cfg, false, cfg.seeds.front());
      double secs = 0.0;
      const auto art = zcam::train_artifact(p, cfg, cfg.seeds.front(), &secs);
      const auto path = out_path(cfg, out, "model.zcam");
      zcam::persist::save_artifact(art, path);
      std::cout << path.string() << " (" << art.kind() << ", " << art.schema.names.size() << " features, "
                << art.fingerprint.training_rows << " rows, " << std::setprecision(3) << secs << " s)\n";
      return 0;
    }
    if (*detect || *classify) {
      cfg.task = *detect ? "detect" : "classify";
      cfg.model_file = model_file;
      if (!positive.empty()) cfg.positive_label = positive;
      return finish(zcam::run_pipeline(cfg));
    }
    if (*scenario) {
      cfg.task = "scenario";
      zcam::apply_setting(cfg, "scenario", kind);
      if (!models.empty()) cfg.scenario_models = models;
      return finish(zcam::run_pipeline(cfg));
    }
    if (*decompose) {
      cfg.task = "decompose";
      return finish(zcam::run_pipeline(cfg));
    }
    if (*evaluate) {
      if (models.empty())
        for (auto k : zcam::ml::kAllClassifierKinds) models.emplace_back(zcam::ml::kind_name(k));
      const auto dir = zcam::resolve_output_dir(cfg);
      zcam::DirectoryLock lock(dir);
      json rep;
      rep["task"] = "evaluate";
      rep["config"] = zcam::config_json(cfg);
      const auto all = zcam::load_inputs(cfg, dir, &rep);
      const auto p = zcam::prepare(all, cfg, true, cfg.seeds.front());
      const std::optional<std::string> pos = positive.empty() ? std::nullopt : std::optional<std::string>(positive);
      for (const auto& m : models) {
        zcam::apply_setting(cfg, "model", m);
        const auto k = *zcam::ml::parse_classifier_kind(m);
        auto params = cfg.classifier;
        params.seed = cfg.seeds.front();
        const auto out_v = zcam::eval::run_supervised(p.train.values, p.train.labels, p.test.values, p.test.labels,
                                                       std::span(&k, 1), params, pos);
        json e;
        e["model"] = m;
        e["metrics"] = zcam::to_json(out_v[0].metrics);
        for (const auto& [truth, row] : out_v[0].misclassification)
          for (const auto& [pr, pct] : row) e["misclassification"][truth][pr] = pct;
        e["timing"] = {{"train_seconds", out_v[0].train_seconds}, {"predict_seconds", out_v[0].predict_seconds}};
        rep["evaluation"].push_back(e);
      }
      rep["features"] = p.train.column_names;
      zcam::write_json(dir / "evaluate.json", rep);
      print_report(rep, std::cout);
      std::cout << (dir / "evaluate.json").string() << '\n';
      return 0;
    }
    if (*report) {
      for (const auto& r : reports) {
        std::ifstream f(r);
        json j;
        try {
          j = json::parse(f);
        } catch (const json::exception& e) {
          zcam::fail(zcam::Errc::CorruptPayload, r + ": " + e.what());
        }
        std::cout << "== " << r << '\n';
        print_report(j, std::cout);
      }
      return 0;
    }
    if (*run) {
      if (g.config_file.empty()) zcam::fail(zcam::Errc::Usage, "run needs --config");
      return finish(zcam::run_pipeline(cfg));
    }
  } catch (const zcam::Error& e) {
    std::cerr << "zcam: " << e.what() << '\n';
    return zcam::exit_status(e.code());
  } catch (const std::exception& e) {
    std::cerr << "zcam: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
