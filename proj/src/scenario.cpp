#include "zcam/scenario.hpp"

#include <chrono>
#include <cmath>

#include "zcam/dataset.hpp"
#include "zcam/error.hpp"
#include "zcam/rng.hpp"

namespace zcam::eval {

std::string_view scenario_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::AllZeroDay: return "all-zero-day";
    case ScenarioKind::AllButOne: return "all-but-one";
    case ScenarioKind::OnlyOne: return "only-one";
  }
  return "?";
}

ScenarioKind parse_scenario_kind(std::string_view name) {
  for (auto k : {ScenarioKind::AllZeroDay, ScenarioKind::AllButOne, ScenarioKind::OnlyOne})
    if (scenario_name(k) == name) return k;
  fail(Errc::Usage, "unknown scenario '" + std::string(name) + "'");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Scaler {
  std::vector<double> mean, scale;

  explicit Scaler(const Matrix& x, bool enabled) : mean(x.cols(), 0.0), scale(x.cols(), 1.0) {
    if (!enabled) return;
    for (std::size_t c = 0; c < x.cols(); ++c) {
      double m = 0.0, m2 = 0.0;
      for (std::size_t i = 0; i < x.rows(); ++i) {
        const double v = x(i, c), d = v - m;
        m += d / static_cast<double>(i + 1);
        m2 += d * (v - m);
      }
      const double sd = std::sqrt(m2 / static_cast<double>(x.rows()));
      mean[c] = m;
      scale[c] = sd > 0.0 ? sd : 1.0;
    }
  }

  Matrix apply(const Matrix& x) const {
    Matrix out = x;
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t c = 0; c < x.cols(); ++c) out(i, c) = (x(i, c) - mean[c]) / scale[c];
    return out;
  }
};

Matrix stack(const std::vector<const Matrix*>& parts) {
  Matrix out(0, parts.empty() ? 0 : parts.front()->cols());
  for (const Matrix* p : parts)
    for (std::size_t i = 0; i < p->rows(); ++i) out.append_row(p->row(i));
  return out;
}

struct TestSet {
  std::string name;
  const Matrix* x;
  bool expect_outlier;
};

SeedOutcome evaluate_seed(oc::DetectorKind kind, const Matrix& train, const std::vector<TestSet>& tests,
                          const ScenarioOptions& opt, std::uint64_t seed) {
  SeedOutcome s;
  s.seed = seed;
  const Scaler scaler(train, opt.scale);
  const Matrix train_scaled = scaler.apply(train);

  auto t0 = Clock::now();
  const oc::Detector det = oc::train_detector(kind, train_scaled, opt.params, seed);
  s.train_seconds = seconds_since(t0);

  t0 = Clock::now();
  const auto train_dec = oc::decide(det, train_scaled);
  s.train_rows = train.rows();
  s.train_inliers = train_dec.size() - oc::count_outliers(train_dec);
  s.train_accuracy = static_cast<double>(s.train_inliers) / static_cast<double>(s.train_rows);

  for (const auto& t : tests) {
    SetOutcome o;
    o.name = t.name;
    o.expect_outlier = t.expect_outlier;
    o.rows = t.x->rows();
    if (o.rows > 0) {
      const auto dec = oc::decide(det, scaler.apply(*t.x));
      o.outliers = oc::count_outliers(dec);
      o.inliers = o.rows - o.outliers;
      o.accuracy = static_cast<double>(t.expect_outlier ? o.outliers : o.inliers) / static_cast<double>(o.rows);
    }
    if (t.expect_outlier) {
      s.test_inliers += o.inliers;
      s.test_outliers += o.outliers;
    }
    s.sets.push_back(std::move(o));
  }
  s.predict_seconds = seconds_since(t0);
  const std::size_t zd = s.test_inliers + s.test_outliers;
  s.test_accuracy = zd ? static_cast<double>(s.test_outliers) / static_cast<double>(zd) : 0.0;
  return s;
}

void summarize(ModelOutcome& m) {
  std::vector<double> tr, te;
  for (const auto& s : m.seeds) {
    tr.push_back(s.train_accuracy);
    te.push_back(s.test_accuracy);
  }
  m.train_accuracy = mean_std(tr);
  m.test_accuracy = mean_std(te);
}

}  // namespace

std::vector<ScenarioReport> run_zero_day_scenario(ScenarioKind kind, const ScenarioInputs& in,
                                                  const ScenarioOptions& opt) {
  if (opt.seeds.empty()) fail(Errc::InvalidArgument, "at least one seed is required");
  std::vector<ScenarioReport> reports;

  if (kind == ScenarioKind::AllZeroDay) {
    if (!in.others || in.others->x.rows() == 0) fail(Errc::MissingDataset, "all-zero-day needs an Others set");
    if (in.cameras.empty()) fail(Errc::MissingDataset, "all-zero-day needs at least one camera set");
    ScenarioReport r;
    r.kind = kind;
    r.trained_on = in.others->name;
    r.seeds = opt.seeds;
    r.tested_on.push_back(in.others->name + " (test split)");
    for (const auto& c : in.cameras) r.tested_on.push_back(c.name);
    const std::vector<std::string> no_labels;
    for (auto dk : opt.detectors) {
      ModelOutcome mo;
      mo.kind = dk;
      for (auto seed : opt.seeds) {
        const auto idx = data::split_indices(in.others->x.rows(), no_labels, opt.test_fraction, seed);
        const Matrix train = in.others->x.select_rows(idx.train);
        const Matrix held = in.others->x.select_rows(idx.test);
        std::vector<TestSet> tests{{in.others->name, &held, false}};
        for (const auto& c : in.cameras) tests.push_back({c.name, &c.x, true});
        mo.seeds.push_back(evaluate_seed(dk, train, tests, opt, seed));
      }
      summarize(mo);
      r.models.push_back(std::move(mo));
    }
    reports.push_back(std::move(r));
    return reports;
  }

  if (in.cameras.size() < 2) fail(Errc::MissingDataset, "this scenario needs at least two camera sets");
  for (std::size_t c = 0; c < in.cameras.size(); ++c) {
    ScenarioReport r;
    r.kind = kind;
    r.seeds = opt.seeds;
    std::vector<const Matrix*> rest;
    std::vector<std::string> rest_names;
    for (std::size_t o = 0; o < in.cameras.size(); ++o)
      if (o != c) {
        rest.push_back(&in.cameras[o].x);
        rest_names.push_back(in.cameras[o].name);
      }
    const Matrix union_rest = stack(rest);
    const Matrix* train = nullptr;
    std::vector<TestSet> tests;
    if (kind == ScenarioKind::AllButOne) {
      train = &in.cameras[c].x;
      r.trained_on = in.cameras[c].name;
      r.tested_on = rest_names;
      for (std::size_t o = 0; o < rest.size(); ++o) tests.push_back({rest_names[o], rest[o], true});
    } else {
      train = &union_rest;
      std::string joined;
      for (const auto& n : rest_names) joined += (joined.empty() ? "" : "+") + n;
      r.trained_on = joined;
      r.tested_on = {in.cameras[c].name};
      tests.push_back({in.cameras[c].name, &in.cameras[c].x, true});
    }
    if (train->rows() == 0) fail(Errc::MissingDataset, "empty training set for '" + r.trained_on + "'");
    for (auto dk : opt.detectors) {
      ModelOutcome mo;
      mo.kind = dk;
      for (auto seed : opt.seeds) mo.seeds.push_back(evaluate_seed(dk, *train, tests, opt, seed));
      summarize(mo);
      r.models.push_back(std::move(mo));
    }
    reports.push_back(std::move(r));
  }
  return reports;
}

std::vector<SupervisedOutcome> run_supervised(const Matrix& train_x, std::span<const std::string> train_y,
                                              const Matrix& test_x, std::span<const std::string> test_y,
                                              std::span<const ml::ClassifierKind> kinds,
                                              const ml::ClassifierParams& params,
                                              const std::optional<std::string>& positive) {
  std::vector<SupervisedOutcome> out;
  for (auto k : kinds) {
    SupervisedOutcome o;
    o.kind = k;
    auto t0 = Clock::now();
    const auto model = ml::train_classifier(k, train_x, train_y, params);
    o.train_seconds = seconds_since(t0);
    t0 = Clock::now();
    const auto pred = ml::predict(model, test_x);
    o.predict_seconds = seconds_since(t0);
    o.metrics = compute_metrics(test_y, pred, positive);
    o.misclassification = misclassification_table(o.metrics.confusion);
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace zcam::eval
