#include <gtest/gtest.h>

#include "feddense/resources.hpp"
#include "fixtures.hpp"

using namespace feddense;

namespace {

ModelConfig cfg_of(ModelVariant v, std::size_t L, std::size_t r, std::size_t F = 32, std::size_t C = 2) {
  ModelConfig c;
  c.variant = v;
  c.num_layers = L;
  c.hidden = r;
  c.feature_dim = F;
  c.struct_dim = 32;
  c.num_classes = C;
  return c;
}

}  // namespace

TEST(LayerCost, Examples) {
  EXPECT_EQ(analytic_layer_cost(2, 1, 1, 1), (LayerCost{6, 2}));
  EXPECT_EQ(analytic_layer_cost(5, 4, 0, 3), (LayerCost{0, 3}));
  EXPECT_EQ(analytic_layer_cost(1, 0, 2, 3), (LayerCost{12, 9}));
}

TEST(ModelReport, ParameterCountsMatchInstantiation) {
  for (auto v : {ModelVariant::ddc, ModelVariant::decoupled, ModelVariant::single}) {
    auto cfg = cfg_of(v, 3, 16);
    auto r = model_report(cfg, v == ModelVariant::single ? Strategy::fedavg : Strategy::feddense, {10, 12, 1});
    auto p = init_params<float>(cfg, 0);
    EXPECT_EQ(r.param_count_total, p.count());
    EXPECT_EQ(r.param_count_structural, p.count(nn::ParamGroup::structural));
    EXPECT_EQ(r.model_size_bytes, 4 * p.count());
  }
}

TEST(ModelReport, PayloadPerStrategy) {
  auto cfg = cfg_of(ModelVariant::ddc, 3, 16);
  GraphStats g{10, 12, 1};
  EXPECT_EQ(model_report(cfg, Strategy::local, g).payload_bytes_per_round, 0u);
  auto dense = model_report(cfg, Strategy::feddense, g);
  EXPECT_EQ(dense.param_count_shared, 1344u);
  EXPECT_EQ(dense.payload_bytes_per_round, 5376u);
  auto avg = model_report(cfg, Strategy::fedavg, g);
  EXPECT_EQ(avg.payload_bytes_per_round, avg.model_size_bytes);
  EXPECT_EQ(model_report(cfg, Strategy::fedprox, g), avg);
  EXPECT_THROW(model_report(cfg_of(ModelVariant::single, 3, 16), Strategy::feddense, g), UnsupportedVariant);
}

TEST(ModelReport, StructuralPayloadIsSmallFractionOfWideBaseline) {
  GraphStats g{18, 20, 1};
  auto dense = model_report(cfg_of(ModelVariant::ddc, 3, 16), Strategy::feddense, g);
  for (auto v : {ModelVariant::single, ModelVariant::ddc}) {
    auto base = model_report(cfg_of(v, 3, 64), Strategy::fedavg, g);
    EXPECT_LT(static_cast<double>(dense.payload_bytes_per_round) / static_cast<double>(base.payload_bytes_per_round),
              0.20);
  }
}

TEST(ModelReport, MeasuredFlopsEqualAnalytic) {
  Rng rng = make_rng({77});
  for (int trial = 0; trial < 20; ++trial) {
    auto v = static_cast<ModelVariant>(uniform_index(rng, 3));
    auto cfg = cfg_of(v, 1 + uniform_index(rng, 4), 1 + uniform_index(rng, 20), 1 + uniform_index(rng, 10),
                      2 + uniform_index(rng, 4));
    const std::size_t n = 1 + uniform_index(rng, 30);
    const std::size_t e = uniform_index(rng, n * (n - 1) / 2 + 1);
    auto r = model_report(cfg, Strategy::fedavg, {n, e, 7});
    EXPECT_EQ(r.measured_flops_per_graph, r.analytic_flops_per_graph) << to_string(v) << " n=" << n << " e=" << e;
    EXPECT_EQ(r.measured_flops_per_round, 3 * 7 * r.measured_flops_per_graph);
  }
}

TEST(ModelReport, MeasuredFlopsEqualAnalyticOnRealGraphs) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::erdos_renyi;
    spec.n_nodes = 3 + seed;
    spec.feature_dim = 4;
    Graph g = generate_synthetic(spec, seed);
    auto cfg = cfg_of(ModelVariant::ddc, 3, 8, 4);
    auto p = init_params<float>(cfg, seed);
    EXPECT_EQ(measured_forward_flops(cfg, p, g, {}), analytic_model(cfg, {g.num_nodes(), g.num_edges(), 1}).forward_flops);
  }
}

TEST(ModelReport, FlopsAndParamsGrowWithWidthAndDepth) {
  GraphStats g{12, 15, 1};
  for (auto v : {ModelVariant::ddc, ModelVariant::decoupled, ModelVariant::single}) {
    std::uint64_t prev_f = 0, prev_p = 0;
    for (std::size_t r = 2; r <= 32; r *= 2) {
      auto rep = model_report(cfg_of(v, 3, r), Strategy::fedavg, g);
      EXPECT_GT(rep.analytic_flops_per_graph, prev_f);
      EXPECT_GT(rep.param_count_total, prev_p);
      prev_f = rep.analytic_flops_per_graph;
      prev_p = rep.param_count_total;
    }
    prev_f = prev_p = 0;
    for (std::size_t L = 1; L <= 5; ++L) {
      auto rep = model_report(cfg_of(v, L, 8), Strategy::fedavg, g);
      EXPECT_GT(rep.analytic_flops_per_graph, prev_f);
      EXPECT_GT(rep.param_count_total, prev_p);
      prev_f = rep.analytic_flops_per_graph;
      prev_p = rep.param_count_total;
    }
  }
}

TEST(ModelReport, FederatedPayloadMatchesReport) {
  auto fc = fixtures::small_federation(Strategy::feddense, 2, 1);
  std::vector<GraphDataset> ds = {generate_dataset(fixtures::star_er(1, 10)), generate_dataset(fixtures::star_er(2, 10))};
  Federation fed(fc, fixtures::client_data(ds, fc));
  auto rm = fed.run_round();
  auto cfg = fed.clients()[0].model;
  auto rep = model_report(cfg, Strategy::feddense, {5, 4, 1});
  for (const auto& c : rm.clients) EXPECT_EQ(c.upload_bytes, rep.payload_bytes_per_round);
}

TEST(ModelReport, Errors) {
  auto cfg = cfg_of(ModelVariant::ddc, 3, 8);
  EXPECT_THROW(model_report(cfg, Strategy::feddense, {0, 0, 1}), InvalidArgument);
  EXPECT_THROW(model_report(cfg, Strategy::feddense, {3, 4, 1}), InvalidArgument);
  cfg.struct_dim = 20;
  EXPECT_THROW(model_report(cfg, Strategy::feddense, {3, 2, 1}), ConfigError);
  EXPECT_NO_THROW(model_report(cfg, Strategy::feddense, {3, 2, 1}, {10, 10}));
}

TEST(StandInGraph, HasRequestedCounts) {
  auto g = stand_in_graph(6, 9, 2);
  EXPECT_EQ(g.num_nodes(), 6u);
  EXPECT_EQ(g.num_edges(), 9u);
  EXPECT_EQ(g.feature_dim(), 2u);
  EXPECT_EQ(stand_in_graph(4, 6, 1).num_edges(), 6u);
}
