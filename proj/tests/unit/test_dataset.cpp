#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "support/flow_fixtures.hpp"
#include "support/synth.hpp"
#include "zcam/dataset.hpp"
#include "zcam/error.hpp"
#include "zcam/flow_csv.hpp"

using namespace zcam;
using namespace zcam::test;

namespace {

data::FeatureMatrix from_text(const std::string& s) {
  std::istringstream in(s);
  return data::read_csv(in);
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Io;
}

}  // namespace

TEST_CASE("non-finite rows are dropped and counted") {
  std::string csv = "a,Flow Byts/s,Label\n";
  for (int i = 0; i < 10; ++i) csv += std::to_string(i) + "," + (i == 3 ? "Infinity" : i == 7 ? "NaN" : "1.5") + ",x\n";
  const auto m = from_text(csv);
  CHECK(m.rows() == 8);
  CHECK(m.dropped_rows == 2);
  CHECK(m.cols() == 2);
  CHECK(m.values(3, 0) == 4.0);
}

TEST_CASE("identity columns become metadata") {
  const auto m = from_text("Flow ID,Src IP,Src Port,Dst IP,Dst Port,Protocol,Timestamp,f1,Label\n"
                           "7,1.2.3.4,10,5.6.7.8,20,6,99,3.5,Cam\n");
  CHECK(m.column_names == std::vector<std::string>{"f1"});
  CHECK(m.meta[0].src_ip == "1.2.3.4");
  CHECK(m.meta[0].timestamp == "99");
  CHECK(m.labels[0] == "Cam");
}

TEST_CASE("missing Label column is a schema mismatch") {
  CHECK(code_of([] { from_text("a,b\n1,2\n"); }) == Errc::SchemaMismatch);
  CHECK(code_of([] { from_text("a,Label\n1,2,3\n"); }) == Errc::SchemaMismatch);
  CHECK(code_of([] { from_text(""); }) == Errc::EmptyDataset);
}

TEST_CASE("two files concatenate by row") {
  TempDir dir("data");
  {
    std::ofstream(dir / "a.csv") << "x,y,Label\n1,2,A\n3,4,A\n";
    std::ofstream(dir / "b.csv") << "y,x,Label\n20,10,B\n";
  }
  const std::vector<std::filesystem::path> paths = {dir / "a.csv", dir / "b.csv"};
  data::LabelMap lm = {{"B", "Bee"}};
  const auto m = data::load_records(paths, &lm, "Combined");
  CHECK(m.rows() == 3);
  CHECK(m.values(2, 0) == 10.0);
  CHECK(m.values(2, 1) == 20.0);
  CHECK(m.labels == std::vector<std::string>{"A", "A", "Bee"});
  CHECK(m.source == "Combined");
}

TEST_CASE("native flow-meter headers load like our own export") {
  const auto f = flow_fixtures()[1];
  const auto recs = flow::meter_packets(decode_all(f.packets));
  std::ostringstream ours;
  flow::write_csv(ours, recs);
  std::string text = ours.str();
  const std::string header = text.substr(0, text.find('\n'));
  std::string native = header;
  const std::vector<std::pair<std::string, std::string>> rename = {
      {"Src IP", " Source IP"}, {"Dst Port", " Destination Port"}, {"Tot Fwd Pkts", " Total Fwd Packets"},
      {"Flow Byts/s", "Flow Bytes/s"}, {"Pkt Size Avg", " Average Packet Size"},
      {"Init Fwd Win Byts", "Init_Win_bytes_forward"}, {"Fwd Seg Size Min", " min_seg_size_forward"},
      {"Label", " Label"}};
  for (const auto& [a, b] : rename) native.replace(native.find(a), a.size(), b);
  const auto m1 = from_text(text);
  const auto m2 = from_text(native + text.substr(text.find('\n')));
  CHECK(m1.column_names == m2.column_names);
  CHECK(m1.values == m2.values);
  CHECK(m1.meta == m2.meta);
  CHECK(m1.cols() == flow::kNumStats);
}

TEST_CASE("constant columns are pruned") {
  Matrix x(5, 77);
  Rng rng(3);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 77; ++c) x(r, c) = c < 15 ? double(c) : rng.uniform();
  data::FeatureMatrix m;
  for (int c = 0; c < 77; ++c) m.column_names.push_back("f" + std::to_string(c));
  m.values = x;
  const auto p = data::prune_constant(m);
  CHECK(p.cols() == 62);
  CHECK(p.pruned.size() == 15);
  CHECK(p.pruned.front() == "f0");

  data::FeatureMatrix one;
  one.column_names = {"zeros", "spike"};
  one.values = Matrix{{0, 0}, {0, 0}, {0, 5}};
  const auto q = data::prune_constant(one);
  CHECK(q.column_names == std::vector<std::string>{"spike"});

  data::FeatureMatrix flat;
  flat.column_names = {"a"};
  flat.values = Matrix{{1}, {1}};
  CHECK(code_of([&] { data::prune_constant(flat); }) == Errc::AllConstant);
}

TEST_CASE("scaler fit on train only") {
  data::FeatureMatrix train;
  train.column_names = {"v"};
  train.values = Matrix{{0}, {2}};
  data::FeatureMatrix test = train;
  test.values = Matrix{{1}, {4}};
  const std::vector<data::FeatureMatrix> others = {test};
  const auto s = data::fit_apply_scaler(train, others);
  CHECK(s.params.mean[0] == 1.0);
  CHECK(s.params.stddev[0] == 1.0);
  CHECK(s.train.values(0, 0) == -1.0);
  CHECK(s.train.values(1, 0) == 1.0);
  CHECK(s.others[0].values(0, 0) == 0.0);
  CHECK(s.others[0].values(1, 0) == 3.0);

  const Matrix x = gaussian_blob(50, {3, -7, 100}, 4.0, 11);
  const auto p = data::fit_scaler(x);
  const Matrix z = data::apply_scaler(p, x);
  for (std::size_t c = 0; c < 3; ++c) {
    double m = 0, v = 0;
    for (std::size_t r = 0; r < 50; ++r) m += z(r, c) / 50.0;
    for (std::size_t r = 0; r < 50; ++r) v += (z(r, c) - m) * (z(r, c) - m) / 50.0;
    CHECK(std::abs(m) < 1e-9);
    CHECK(std::abs(std::sqrt(v) - 1.0) < 1e-9);
  }
  const Matrix back = data::inverse_scaler(p, z);
  for (std::size_t i = 0; i < x.data().size(); ++i) CHECK(std::abs(back.data()[i] - x.data()[i]) < 1e-9);
  CHECK(code_of([] { data::fit_scaler(Matrix{{1}, {1}}); }) == Errc::ZeroStd);
}

TEST_CASE("split sizes, stratification and determinism") {
  const auto a = data::split_indices(100, {}, 0.1, 5);
  CHECK(a.train.size() == 90);
  CHECK(a.test.size() == 10);
  const auto b = data::split_indices(100, {}, 0.1, 5);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  const auto c = data::split_indices(100, {}, 0.1, 6);
  CHECK(a.test != c.test);

  std::vector<std::string> labels(20, "A");
  for (int i = 10; i < 20; ++i) labels[i] = "B";
  const auto s = data::split_indices(20, labels, 0.5, 1);
  int test_a = 0;
  for (auto i : s.test) test_a += labels[i] == "A";
  CHECK(s.test.size() == 10);
  CHECK(test_a == 5);

  std::set<std::size_t> all(a.train.begin(), a.train.end());
  all.insert(a.test.begin(), a.test.end());
  CHECK(all.size() == 100);
  CHECK(code_of([] { data::split_indices(1, {}, 0.5, 0); }) == Errc::TooFewRows);
  CHECK(code_of([] { data::split_indices(10, {}, 1.0, 0); }) == Errc::InvalidArgument);
}

TEST_CASE("feature ranking finds the signal column") {
  Rng rng(9);
  data::FeatureMatrix m;
  m.column_names = {"noise1", "signal", "noise2", "noise3"};
  m.values = Matrix(300, 4);
  for (std::size_t r = 0; r < 300; ++r) {
    const bool pos = r % 2 == 0;
    m.values(r, 0) = rng.uniform();
    m.values(r, 1) = pos ? 1.0 + rng.uniform() : -1.0 - rng.uniform();
    m.values(r, 2) = rng.uniform();
    m.values(r, 3) = rng.normal();
    m.labels.push_back(pos ? "P" : "N");
  }
  const auto r = data::rank_features(m, 30, 1);
  CHECK(r.entries.front().first == "signal");
  double total = 0.0;
  for (const auto& e : r.entries) total += e.second;
  CHECK(total == doctest::Approx(1.0));

  // Column order does not matter: the ranking is keyed by name.
  data::FeatureMatrix perm = m;
  perm.column_names = {"noise3", "noise2", "signal", "noise1"};
  perm.values = m.values.select_cols(std::vector<std::size_t>{3, 2, 1, 0});
  const auto r2 = data::rank_features(perm, 30, 1);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(r2.entries[i].first == r.entries[i].first);
    CHECK(r2.entries[i].second == doctest::Approx(r.entries[i].second).epsilon(1e-12));
  }

  const auto top1 = data::select_top_k(m, r, 1);
  CHECK(top1.column_names == std::vector<std::string>{"signal"});
  CHECK(top1.values.col(0) == m.values.col(1));
  const auto all = data::select_top_k(m, r, 4);
  CHECK(std::set(all.column_names.begin(), all.column_names.end()) ==
        std::set(m.column_names.begin(), m.column_names.end()));
  CHECK(code_of([&] { data::select_top_k(m, r, 5); }) == Errc::KTooLarge);

  std::stringstream io;
  data::write_ranking(io, r);
  const auto back = data::read_ranking(io);
  REQUIRE(back.entries.size() == 4);
  CHECK(back.entries[0].first == "signal");
  CHECK(back.entries[0].second == r.entries[0].second);
}

TEST_CASE("ranking needs two classes") {
  data::FeatureMatrix m;
  m.column_names = {"a"};
  m.values = Matrix{{1}, {2}};
  m.labels = {"x", "x"};
  CHECK(code_of([&] { data::rank_features(m); }) == Errc::SingleClass);
}

TEST_CASE("write then read preserves the matrix") {
  data::FeatureMatrix m;
  m.column_names = {"a", "b"};
  m.values = Matrix{{0.1, 1e-300}, {3, -2.5}};
  m.labels = {"x", "y"};
  std::stringstream io;
  data::write_csv(io, m);
  const auto back = data::read_csv(io);
  CHECK(back.values == m.values);
  CHECK(back.labels == m.labels);
}
