#include <doctest.h>

#include "support/synth.hpp"
#include "zcam/error.hpp"
#include "zcam/scenario.hpp"

using namespace zcam;
using namespace zcam::eval;
using namespace zcam::test;

namespace {

ScenarioInputs inputs(std::size_t cams) {
  ScenarioInputs in;
  in.others = NamedSet{"Others", gaussian_blob(200, {0, 0, 0}, 1.0, 1)};
  for (std::size_t c = 0; c < cams; ++c) {
    std::vector<double> center(3, 0.0);
    center[c % 3] = 6.0 + double(c);
    in.cameras.push_back({"Cam" + std::to_string(c), gaussian_blob(60, center, 1.0, 10 + c)});
  }
  return in;
}

ScenarioOptions fast_options() {
  ScenarioOptions o;
  o.detectors = {oc::DetectorKind::IsolationForest, oc::DetectorKind::Ocsvm};
  o.params.ocsvm.nu = 0.05;
  o.params.ocsvm.gamma = 0.3;
  o.params.iforest.n_trees = 50;
  o.seeds = {0, 1, 2};
  return o;
}

}  // namespace

TEST_CASE("all-zero-day trains on Others and treats cameras as outliers") {
  const auto reps = run_zero_day_scenario(ScenarioKind::AllZeroDay, inputs(3), fast_options());
  REQUIRE(reps.size() == 1);
  const auto& r = reps[0];
  CHECK(r.trained_on == "Others");
  CHECK(r.tested_on.size() == 4);
  REQUIRE(r.models.size() == 2);
  for (const auto& m : r.models) {
    REQUIRE(m.seeds.size() == 3);
    for (const auto& s : m.seeds) {
      CHECK(s.train_rows == 180);
      CHECK(s.sets.size() == 4);
      CHECK_FALSE(s.sets[0].expect_outlier);
      CHECK(s.sets[0].rows == 20);
      CHECK(s.test_inliers + s.test_outliers == 180);
    }
    CHECK(m.test_accuracy.mean > 0.9);
    CHECK(m.train_accuracy.mean > 0.85);
  }
}

TEST_CASE("all-but-one and only-one produce one report per camera") {
  auto opt = fast_options();
  opt.seeds = {0};
  const auto in = inputs(3);
  const auto abo = run_zero_day_scenario(ScenarioKind::AllButOne, in, opt);
  REQUIRE(abo.size() == 3);
  CHECK(abo[1].trained_on == "Cam1");
  CHECK(abo[1].tested_on == std::vector<std::string>{"Cam0", "Cam2"});
  CHECK(abo[1].models[0].seeds[0].train_rows == 60);
  const auto oo = run_zero_day_scenario(ScenarioKind::OnlyOne, in, opt);
  REQUIRE(oo.size() == 3);
  CHECK(oo[0].trained_on == "Cam1+Cam2");
  CHECK(oo[0].tested_on == std::vector<std::string>{"Cam0"});
  CHECK(oo[0].models[0].seeds[0].train_rows == 120);
}

TEST_CASE("scenario errors and names") {
  ScenarioInputs none;
  none.cameras = inputs(1).cameras;
  CHECK_THROWS_AS(run_zero_day_scenario(ScenarioKind::AllZeroDay, none, fast_options()), Error);
  CHECK_THROWS_AS(run_zero_day_scenario(ScenarioKind::OnlyOne, none, fast_options()), Error);
  for (auto k : {ScenarioKind::AllZeroDay, ScenarioKind::AllButOne, ScenarioKind::OnlyOne})
    CHECK(parse_scenario_kind(scenario_name(k)) == k);
  CHECK_THROWS_AS(parse_scenario_kind("zero"), Error);
}

TEST_CASE("scenario runs are reproducible") {
  auto opt = fast_options();
  opt.seeds = {3};
  const auto a = run_zero_day_scenario(ScenarioKind::AllZeroDay, inputs(2), opt);
  const auto b = run_zero_day_scenario(ScenarioKind::AllZeroDay, inputs(2), opt);
  for (std::size_t m = 0; m < a[0].models.size(); ++m) {
    CHECK(a[0].models[m].seeds[0].train_inliers == b[0].models[m].seeds[0].train_inliers);
    CHECK(a[0].models[m].seeds[0].test_outliers == b[0].models[m].seeds[0].test_outliers);
  }
}

TEST_CASE("supervised runner reports metrics per kind") {
  const auto all = labeled_blobs(3, 60, 2, 6.0, 0.5, 3);
  std::vector<std::size_t> tr, te;
  for (std::size_t i = 0; i < all.y.size(); ++i) (i % 60 < 50 ? tr : te).push_back(i);
  std::vector<std::string> ytr, yte;
  for (auto i : tr) ytr.push_back(all.y[i]);
  for (auto i : te) yte.push_back(all.y[i]);
  const std::vector<ml::ClassifierKind> kinds{ml::ClassifierKind::Cart, ml::ClassifierKind::Gnb};
  const auto out = run_supervised(all.x.select_rows(tr), ytr, all.x.select_rows(te), yte, kinds, {},
                                  std::string("class1"));
  REQUIRE(out.size() == 2);
  for (const auto& o : out) {
    CHECK(o.metrics.accuracy > 0.8);
    CHECK(o.metrics.positive == "class1");
    CHECK(o.metrics.confusion.total() == 30);
    std::size_t wrong = 0;
    for (const auto& [truth, row] : o.misclassification) wrong += row.size();
    CHECK((wrong == 0) == (o.metrics.accuracy == 1.0));
  }
}
