#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "support/flow_fixtures.hpp"
#include "support/synth.hpp"
#include "zcam/dataset.hpp"
#include "zcam/error.hpp"
#include "zcam/pipeline.hpp"

using namespace zcam;
using namespace zcam::test;
namespace fs = std::filesystem;

namespace {

// 3 labelled clusters in 5 dimensions, the first one called Others.
fs::path write_corpus(const TempDir& dir, std::size_t per_class = 60) {
  auto b = labeled_blobs(3, per_class, 5, 6.0, 1.0, 21);
  for (auto& y : b.y)
    if (y == "class0") y = "Others";
  data::FeatureMatrix m;
  m.column_names = {"f0", "f1", "f2", "f3", "f4"};
  m.values = b.x;
  m.labels = b.y;
  const auto path = dir / "corpus.csv";
  std::ofstream f(path);
  data::write_csv(f, m);
  return path;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream f(p);
  std::size_t n = 0;
  for (std::string line; std::getline(f, line);) ++n;
  return n;
}

nlohmann::json read_report(const fs::path& dir) {
  std::ifstream f(dir / "report.json");
  return nlohmann::json::parse(f);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ZCAM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST_CASE("input specs") {
  auto s = parse_input("cap/a.pcap:Nest Cam");
  CHECK(s.path == "cap/a.pcap");
  CHECK(s.label == "Nest Cam");
  s = parse_input("plain.csv");
  CHECK(s.path == "plain.csv");
  CHECK_FALSE(s.label.has_value());
  s = parse_input("dir:x/file.pcap");
  CHECK(s.path == "dir:x/file.pcap");
  CHECK_FALSE(s.label.has_value());
  s = parse_input("trailing:");
  CHECK_FALSE(s.label.has_value());
}

TEST_CASE("pcap files are recognised by magic") {
  TempDir dir("pipe");
  CaptureWriter w;
  w.save(dir / "a.bin");
  std::ofstream(dir / "b.pcap") << "a,b,Label\n";
  CHECK(is_pcap_file(dir / "a.bin"));
  CHECK_FALSE(is_pcap_file(dir / "b.pcap"));
  CHECK_FALSE(is_pcap_file(dir / "missing"));
}

TEST_CASE("output directory resolution") {
  PipelineConfig c;
  c.output_dir = "/tmp/explicit";
  ::setenv("ZCAM_OUT_DIR", "/tmp/from-env", 1);
  CHECK(resolve_output_dir(c) == "/tmp/explicit");
  c.output_dir.clear();
  CHECK(resolve_output_dir(c) == "/tmp/from-env");
  ::unsetenv("ZCAM_OUT_DIR");
  CHECK(resolve_output_dir(c) == "zcam-out");
}

TEST_CASE("a locked output directory is refused") {
  TempDir dir("pipe");
  const fs::path out = dir / "out";
  DirectoryLock held(out);
  try {
    DirectoryLock again(out);
    FAIL("second lock succeeded");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Io);
  }
  PipelineConfig c;
  c.task = "decompose";
  c.inputs = {write_corpus(dir).string()};
  c.output_dir = out.string();
  const auto r = run_pipeline(c);
  CHECK(r.status == 2);
  CHECK(r.error.find("in use") != std::string::npos);
}

TEST_CASE("extract meters a labelled capture") {
  TempDir dir("pipe");
  const auto fx = flow_fixtures();
  const auto& hs = fx.front();
  REQUIRE(hs.name == "handshake");
  write_fixture(hs, dir / "hs.pcap");

  PipelineConfig c;
  c.task = "extract";
  c.inputs = {(dir / "hs.pcap").string() + ":Cam"};
  c.output_dir = (dir / "out").string();
  const auto r = run_pipeline(c);
  REQUIRE_MESSAGE(r.status == 0, r.error);
  CHECK(r.report["extract"]["flows"] == 1);

  const std::vector<fs::path> paths{dir / "out" / "flows.csv"};
  const auto m = data::load_records(paths);
  REQUIRE(m.rows() == 1);
  CHECK(m.labels[0] == "Cam");
  CHECK(m.cols() == flow::kNumStats);
  for (const auto& [name, want] : hs.records.front()) {
    CAPTURE(name);
    const auto it = std::find(m.column_names.begin(), m.column_names.end(), name);
    REQUIRE(it != m.column_names.end());
    const double got = m.values(0, static_cast<std::size_t>(it - m.column_names.begin()));
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("classify trains, saves and reloads") {
  TempDir dir("pipe");
  const auto corpus = write_corpus(dir);
  PipelineConfig c;
  c.task = "classify";
  c.model = "cart";
  c.top_k = 3;
  c.ranking_trees = 10;
  c.inputs = {corpus.string()};
  c.output_dir = (dir / "train").string();
  c.positive_label = "Others";
  auto r = run_pipeline(c);
  REQUIRE_MESSAGE(r.status == 0, r.error);
  for (const char* f : {"predictions.csv", "model.zcam", "ranking.csv", "report.json", "curves_roc.csv"})
    CHECK_MESSAGE(fs::exists(dir / "train" / f), f);
  const auto rep = read_report(dir / "train");
  CHECK(rep["model"]["features"].size() == 3);
  CHECK(rep["metrics"]["accuracy"].get<double>() > 0.9);
  CHECK(line_count(dir / "train" / "predictions.csv") == 1 + 18);  // ceil(0.1 * 180) test rows

  c.model_file = (dir / "train" / "model.zcam").string();
  c.output_dir = (dir / "reuse").string();
  r = run_pipeline(c);
  REQUIRE_MESSAGE(r.status == 0, r.error);
  CHECK(line_count(dir / "reuse" / "predictions.csv") == 1 + 180);
  CHECK(read_report(dir / "reuse")["metrics"]["accuracy"].get<double>() > 0.9);
}

TEST_CASE("detect with a label-restricted training set") {
  TempDir dir("pipe");
  PipelineConfig c;
  c.task = "detect";
  c.model = "iforest";
  c.detector.iforest.n_trees = 50;
  c.train_labels = {"Others"};
  c.inputs = {write_corpus(dir).string()};
  c.output_dir = (dir / "out").string();
  const auto r = run_pipeline(c);
  REQUIRE_MESSAGE(r.status == 0, r.error);
  const auto rep = read_report(dir / "out");
  CHECK(rep["model"]["training_rows"] == 54);  // Others rows of the training split
  const auto& per = rep["decisions"]["per_label"];
  CHECK(per["class1"]["outliers"].get<int>() == 6);
  CHECK(per["class2"]["outliers"].get<int>() == 6);
  CHECK(line_count(dir / "out" / "decisions.csv") == 1 + 18);

  c.train_labels = {"nobody"};
  c.output_dir = (dir / "none").string();
  CHECK(run_pipeline(c).status == 2);
}

TEST_CASE("scenario and decompose tasks") {
  TempDir dir("pipe");
  const auto corpus = write_corpus(dir);
  PipelineConfig c;
  c.task = "scenario";
  c.scenario = eval::ScenarioKind::OnlyOne;
  c.scenario_models = {"iforest"};
  c.detector.iforest.n_trees = 50;
  c.seeds = {0};
  c.inputs = {corpus.string()};
  c.output_dir = (dir / "scen").string();
  auto r = run_pipeline(c);
  REQUIRE_MESSAGE(r.status == 0, r.error);
  CHECK(r.report["scenarios"].size() == 2);

  c.task = "decompose";
  c.decomposition.pca_components = 2;
  c.decomposition.gmm_components = 3;
  c.decomposition.bic_k_max = 4;
  c.output_dir = (dir / "dec").string();
  r = run_pipeline(c);
  REQUIRE_MESSAGE(r.status == 0, r.error);
  CHECK(line_count(dir / "dec" / "outliers.csv") == 1 + 180);
  CHECK(line_count(dir / "dec" / "bic.csv") == 1 + 4 * 4);
  CHECK(r.report["pca"]["outliers"] == 9);
  CHECK(r.report["gmm"]["outliers"] == 9);
  CHECK(r.report["bic_best"]["k"] == 3);
}

TEST_CASE("errors carry the stage and exit status") {
  TempDir dir("pipe");
  PipelineConfig c;
  c.task = "detect";
  c.output_dir = (dir / "out").string();
  auto r = run_pipeline(c);
  CHECK(r.status == 1);
  CHECK(r.error.find("load: no inputs") != std::string::npos);

  c.inputs = {(dir / "absent.csv").string()};
  r = run_pipeline(c);
  CHECK(r.status == 2);
  CHECK(r.error.find("load:") != std::string::npos);

  std::ofstream(dir / "junk.zcam") << "not a model\n";
  c.inputs = {write_corpus(dir).string()};
  c.model_file = (dir / "junk.zcam").string();
  r = run_pipeline(c);
  CHECK(r.status == 3);
  CHECK(r.error.find("load-model:") != std::string::npos);
}

TEST_CASE("command-line exit codes") {
  TempDir dir("cli");
  const auto corpus = write_corpus(dir).string();
  std::ofstream(dir / "junk.zcam") << "not a model\n";
  const std::string out = " --out-dir " + (dir / "out").string();
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("--bogus") == 1);
  CHECK(run_cli("--set nope=1 decompose --input " + corpus) == 1);
  CHECK(run_cli(out + " decompose --input " + (dir / "absent.csv").string()) == 2);
  CHECK(run_cli(out + " classify --model-file " + (dir / "junk.zcam").string() + " --input " + corpus) == 3);
  CHECK(run_cli(out + " --set iforest.trees=20 train --model iforest --input " + corpus) == 0);
  CHECK(fs::exists(dir / "out" / "model.zcam"));
}
