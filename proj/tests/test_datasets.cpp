#include "cgnn/datasets.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace cgnn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cgnn_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

fs::path two_node_fixture(const std::string& name) {
  const fs::path dir = scratch(name);
  write(dir / "graph.tsv", "0\t1\n");
  write(dir / "features.tsv", "0.5\t-1.25\n3\t0.1\n");
  write(dir / "labels.tsv", "0\n1\n");
  write(dir / "split.json", R"({"train":[0],"val":[1],"test":[]})");
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

template <class Fn>
std::string error_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Load, TwoNodeFixtureRoundTrip) {
  const fs::path dir = two_node_fixture("two_node");
  const Dataset ds = load_dataset(dir);
  EXPECT_EQ(ds.num_nodes(), 2u);
  EXPECT_EQ(ds.num_classes(), 2u);
  EXPECT_EQ(ds.graph.num_edges(), 1u);
  EXPECT_EQ(ds.features(0, 1), -1.25);
  EXPECT_EQ(ds.features(1, 1), 0.1);
  EXPECT_EQ(ds.split.train, std::vector<std::size_t>{0});

  const fs::path out = scratch("two_node_out");
  save_dataset(ds, out);
  const Dataset again = load_dataset(out);
  EXPECT_EQ(again.features, ds.features);
  EXPECT_EQ(again.labels, ds.labels);
  EXPECT_TRUE(std::ranges::equal(again.graph.edges(), ds.graph.edges()));
  EXPECT_EQ(again.split.val, ds.split.val);
}

TEST(Load, SymmetrizesAndDeduplicates) {
  const fs::path dir = two_node_fixture("dedup");
  write(dir / "graph.tsv", "1\t0\n0\t1\n");
  EXPECT_EQ(load_dataset(dir).graph.num_edges(), 1u);
  write(dir / "graph.tsv", "1\t1\n");
  EXPECT_THROW(load_dataset(dir), ParseError);
}

TEST(Load, MissingFileAndDirectory) {
  EXPECT_NE(error_of([] { load_dataset("/nonexistent/cgnn"); }).find("/nonexistent/cgnn"), std::string::npos);
  const fs::path dir = two_node_fixture("missing");
  fs::remove(dir / "labels.tsv");
  EXPECT_NE(error_of([&] { load_dataset(dir); }).find("labels.tsv"), std::string::npos);
}

TEST(Load, MalformedLineReportsLineNumber) {
  const fs::path dir = two_node_fixture("malformed");
  write(dir / "features.tsv", "0.5\t-1.25\n3\tabc\n");
  const std::string msg = error_of([&] { load_dataset(dir); });
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;

  write(dir / "features.tsv", "0.5\t-1.25\n3\n");
  EXPECT_NE(error_of([&] { load_dataset(dir); }).find("line 2"), std::string::npos);
}

TEST(Load, OverlapReportsBothSplits) {
  const fs::path dir = two_node_fixture("overlap");
  write(dir / "split.json", R"({"train":[0],"val":[0,1],"test":[]})");
  const std::string msg = error_of([&] { load_dataset(dir); });
  EXPECT_NE(msg.find("node 0"), std::string::npos) << msg;
  EXPECT_NE(msg.find("train"), std::string::npos) << msg;
  EXPECT_NE(msg.find("val"), std::string::npos) << msg;
}

TEST(Load, SplitIndexOutOfRange) {
  const fs::path dir = two_node_fixture("range");
  write(dir / "split.json", R"({"train":[0],"val":[5],"test":[]})");
  EXPECT_THROW(load_dataset(dir), ParseError);
}

TEST(Load, LabelCountMismatch) {
  const fs::path dir = two_node_fixture("labels");
  write(dir / "labels.tsv", "0\n1\n1\n");
  EXPECT_THROW(load_dataset(dir), ParseError);
  write(dir / "labels.tsv", "0\n-1\n");
  EXPECT_THROW(load_dataset(dir), ParseError);
}

TEST(FixedSplit, CoraSizedDefaults) {
  std::vector<int> labels(2708);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 7);
  const Split s = make_fixed_split(labels, 20, 500, 1000, 3);
  EXPECT_EQ(s.train.size(), 140u);
  EXPECT_EQ(s.val.size(), 500u);
  EXPECT_EQ(s.test.size(), 1000u);
  std::vector<int> per_class(7, 0);
  for (auto i : s.train) ++per_class[static_cast<std::size_t>(labels[i])];
  for (int c : per_class) EXPECT_EQ(c, 20);
  EXPECT_NO_THROW(validate_split(s, labels.size()));
}

TEST(FixedSplit, ErrorsAndDeterminism) {
  std::vector<int> labels{0, 0, 0, 1, 1, 1, 1, 1, 1, 1};
  EXPECT_THROW(make_fixed_split(labels, 4, 1, 1, 0), DomainError);
  EXPECT_THROW(make_fixed_split(labels, 2, 4, 3, 0), DomainError);
  const Split a = make_fixed_split(labels, 2, 3, 3, 1);
  const Split b = make_fixed_split(labels, 2, 3, 3, 1);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  std::vector<int> big(400);
  for (std::size_t i = 0; i < big.size(); ++i) big[i] = static_cast<int>(i % 4);
  EXPECT_NE(make_fixed_split(big, 20, 100, 100, 1).train, make_fixed_split(big, 20, 100, 100, 2).train);
}

TEST(Sbm, TwoDisjointCliques) {
  SbmSpec s;
  s.blocks = 2;
  s.nodes_per_block = 25;
  s.p_in = 1.0;
  s.p_out = 0.0;
  const Dataset ds = generate_sbm(s);
  EXPECT_EQ(ds.graph.num_edges(), 2u * 25 * 24 / 2);
  for (const Edge& e : ds.graph.edges()) EXPECT_EQ(ds.labels[e.u], ds.labels[e.v]);
}

TEST(Sbm, FullSignalIsLinearlySeparable) {
  SbmSpec s;
  s.signal = 1.0;
  const Dataset ds = generate_sbm(s);
  // every node sits exactly on its class direction
  for (std::size_t i = 0; i < ds.num_nodes(); ++i) {
    const Index row = static_cast<Index>(i);
    int best = 0;
    double best_score = -1e300;
    for (int c = 0; c < 4; ++c) {
      const Index rep = static_cast<Index>(c * 100);
      const double score = ds.features.row(row).dot(ds.features.row(rep)) - 0.5 * ds.features.row(rep).squaredNorm();
      if (score > best_score) {
        best_score = score;
        best = c;
      }
    }
    EXPECT_EQ(best, ds.labels[i]);
  }
}

TEST(Sbm, EdgeCountNearExpectation) {
  const SbmSpec s;
  const Dataset ds = generate_sbm(s);
  const double pairs_in = 4.0 * 100 * 99 / 2, pairs_out = 6.0 * 100 * 100;
  const double mean = pairs_in * s.p_in + pairs_out * s.p_out;
  const double var = pairs_in * s.p_in * (1 - s.p_in) + pairs_out * s.p_out * (1 - s.p_out);
  EXPECT_LE(std::abs(static_cast<double>(ds.graph.num_edges()) - mean), 4.0 * std::sqrt(var));
}

TEST(Sbm, DefaultSplitAndValidation) {
  const Dataset ds = generate_sbm(SbmSpec{});
  EXPECT_EQ(ds.split.train.size(), 80u);
  EXPECT_EQ(ds.split.val.size(), 100u);
  EXPECT_EQ(ds.split.test.size(), 220u);
  EXPECT_NO_THROW(validate_dataset(ds));
  SbmSpec bad;
  bad.blocks = 0;
  EXPECT_THROW(generate_sbm(bad), DomainError);
  bad = {};
  bad.p_in = 1.5;
  EXPECT_THROW(generate_sbm(bad), DomainError);
  SbmSpec dis;
  dis.p_in = 0.001;
  dis.p_out = 0.05;
  EXPECT_NO_THROW(generate_sbm(dis));
}

TEST(Sbm, SaveIsByteDeterministic) {
  const fs::path a = scratch("sbm_a"), b = scratch("sbm_b");
  save_dataset(generate_sbm(SbmSpec{}), a);
  save_dataset(generate_sbm(SbmSpec{}), b);
  for (const char* f : {"graph.tsv", "features.tsv", "labels.tsv", "split.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const Dataset back = load_dataset(a);
  EXPECT_EQ(back.features, generate_sbm(SbmSpec{}).features);
}

TEST(RowNormalize, SumsToOne) {
  Matrix x(2, 3);
  x << 1, 1, 2, 0, 0, 0;
  const Matrix r = row_normalize(x);
  EXPECT_DOUBLE_EQ(r(0, 2), 0.5);
  EXPECT_EQ(r.row(1).sum(), 0.0);
}

TEST(Cora, TableOneStatistics) {
  const char* root = std::getenv("CGNN_DATA_DIR");
  if (!root || !fs::exists(fs::path(root) / "cora")) GTEST_SKIP() << "converted Cora not found (set CGNN_DATA_DIR)";
  const Dataset ds = load_dataset(fs::path(root) / "cora");
  EXPECT_EQ(ds.num_nodes(), 2708u);
  EXPECT_EQ(ds.features.cols(), 1433);
  EXPECT_EQ(ds.num_classes(), 7u);
}
