#include <gtest/gtest.h>

#include <cstdlib>

#include "feddense/tu_dataset.hpp"
#include "test_util.hpp"

using namespace feddense;
using testutil::TempDir;
using testutil::write_file;

namespace {

// Graph 1: nodes 1-2 joined by an edge. Graph 2: node 3 alone.
void write_minimal(const TempDir& d, const std::string& name, const std::string& labels = "-1\n1\n") {
  write_file(d / (name + "_A.txt"), "1, 2\n2, 1\n");
  write_file(d / (name + "_graph_indicator.txt"), "1\n1\n2\n");
  write_file(d / (name + "_graph_labels.txt"), labels);
  write_file(d / (name + "_node_labels.txt"), "0\n1\n0\n");
}

}  // namespace

TEST(TuDataset, LoadsMinimalDataset) {
  TempDir d;
  write_minimal(d, "TOY");
  auto ds = load_tu_dataset(d.path(), "TOY");
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.graphs[0].num_nodes(), 2u);
  EXPECT_EQ(ds.graphs[1].num_nodes(), 1u);
  EXPECT_EQ(ds.graphs[0].edges(), (std::vector<Edge>{{0, 1}}));
  EXPECT_TRUE(ds.graphs[1].edges().empty());
  EXPECT_EQ(ds.num_classes, 2u);
  EXPECT_EQ(ds.graphs[0].label(), 0u);
  EXPECT_EQ(ds.graphs[1].label(), 1u);
  // Node labels {0,1} one-hot.
  ASSERT_EQ(ds.feature_dim, 2u);
  EXPECT_EQ(ds.graphs[0].feature_row(0)[0], 1.0);
  EXPECT_EQ(ds.graphs[0].feature_row(1)[1], 1.0);
}

TEST(TuDataset, RemapsLabelsAscending) {
  TempDir d;
  write_minimal(d, "TOY", "7\n3\n");
  auto ds = load_tu_dataset(d.path(), "TOY");
  EXPECT_EQ(ds.graphs[0].label(), 1u);
  EXPECT_EQ(ds.graphs[1].label(), 0u);
}

TEST(TuDataset, AcceptsCrlfAndConcatenatesAttributes) {
  TempDir d;
  write_file(d / "T_A.txt", "1,2\r\n2,1\r\n");
  write_file(d / "T_graph_indicator.txt", "1\r\n1\r\n");
  write_file(d / "T_graph_labels.txt", "0\r\n");
  write_file(d / "T_node_labels.txt", "5\r\n9\r\n");
  write_file(d / "T_node_attributes.txt", "0.5, 1.5\r\n2.5, 3.5\r\n");
  auto ds = load_tu_dataset(d.path(), "T");
  ASSERT_EQ(ds.feature_dim, 4u);
  auto r1 = ds.graphs[0].feature_row(1);
  EXPECT_EQ(std::vector<double>(r1.begin(), r1.end()), (std::vector<double>{2.5, 3.5, 0.0, 1.0}));
}

TEST(TuDataset, MissingFileNamesTheFile) {
  TempDir d;
  write_minimal(d, "TOY");
  std::filesystem::remove(d / "TOY_graph_indicator.txt");
  try {
    load_tu_dataset(d.path(), "TOY");
    FAIL() << "expected IngestionError";
  } catch (const IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find("TOY_graph_indicator.txt"), std::string::npos);
  }
}

TEST(TuDataset, NodeOutOfRangeIsMalformed) {
  TempDir d;
  write_minimal(d, "TOY");
  write_file(d / "TOY_A.txt", "1, 2\n2, 9\n");
  EXPECT_THROW(load_tu_dataset(d.path(), "TOY"), MalformedDataset);
}

TEST(TuDataset, NonNumericTokenReportsLine) {
  TempDir d;
  write_minimal(d, "TOY");
  write_file(d / "TOY_A.txt", "1, 2\n2, x\n");
  try {
    load_tu_dataset(d.path(), "TOY");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
}

TEST(TuDataset, DropsSelfLoopsAndCountsThem) {
  TempDir d;
  write_minimal(d, "TOY");
  write_file(d / "TOY_A.txt", "1, 2\n2, 1\n1, 1\n3, 3\n");
  auto ds = load_tu_dataset(d.path(), "TOY");
  EXPECT_EQ(ds.dropped_self_loops, 2u);
  EXPECT_EQ(ds.graphs[0].num_edges(), 1u);
}

TEST(TuDataset, CrossGraphEdgeIsMalformed) {
  TempDir d;
  write_minimal(d, "TOY");
  write_file(d / "TOY_A.txt", "1, 3\n");
  EXPECT_THROW(load_tu_dataset(d.path(), "TOY"), MalformedDataset);
}

TEST(TuDataset, LoadingIsIdempotent) {
  TempDir d;
  write_minimal(d, "TOY");
  EXPECT_EQ(load_tu_dataset(d.path(), "TOY"), load_tu_dataset(d.path(), "TOY"));
}

TEST(TuDataset, WriteThenLoadRoundTrips) {
  TempDir d;
  GraphDataset ds;
  ds.name = "SYN";
  for (std::uint64_t s = 0; s < 12; ++s) {
    SyntheticSpec spec;
    spec.kind = s % 2 ? SyntheticKind::erdos_renyi : SyntheticKind::cycle;
    spec.n_nodes = 3 + s % 5;
    spec.feature_mode = FeatureMode::random;
    spec.feature_dim = 2;
    spec.label = s % 3;
    ds.graphs.push_back(generate_synthetic(spec, s));
  }
  ds.num_classes = 3;
  ds.feature_dim = 2;
  write_tu_dataset(ds, d.path());
  auto back = load_tu_dataset(d.path(), "SYN");
  EXPECT_EQ(back, ds);
}

// Runs only where a copy of MUTAG is available (FEDDENSE_MUTAG_DIR).
TEST(TuDataset, Mutag) {
  const char* dir = std::getenv("FEDDENSE_MUTAG_DIR");
  if (!dir) GTEST_SKIP() << "FEDDENSE_MUTAG_DIR not set";
  auto ds = load_tu_dataset(dir, "MUTAG");
  EXPECT_EQ(ds.size(), 188u);
  EXPECT_EQ(ds.num_classes, 2u);
  std::ifstream labels(std::filesystem::path(dir) / "MUTAG_graph_labels.txt");
  std::size_t lines = 0;
  for (std::string l; std::getline(labels, l);) lines += !l.empty();
  EXPECT_EQ(ds.size(), lines);
}
