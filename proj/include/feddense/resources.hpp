#pragma once

// Analytic FLOP / parameter / payload accounting, and an instrumented
// counterpart that runs the model with FLOP counters installed.
//
// Conventions: a multiply-add is 2 FLOPs; a dense transform [n x a] -> [n x b]
// costs 2nab; a neighborhood aggregation over |E| undirected edges of width a
// costs 2|E|a; activations and pooling cost one FLOP per input element;
// biases, concatenation and the loss are free. Backward is estimated as 2x
// forward. Sizes assume 4 bytes per parameter.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "feddense/error.hpp"
#include "feddense/fed.hpp"
#include "feddense/model.hpp"

namespace feddense {

struct LayerCost {
  std::uint64_t flops = 0;
  std::uint64_t params = 0;  // weights + bias
  friend bool operator==(const LayerCost&, const LayerCost&) = default;
};

/// flops = 2|E|a + 2|V|ab, params = ab + b.
constexpr LayerCost analytic_layer_cost(std::uint64_t num_nodes, std::uint64_t num_edges, std::uint64_t a,
                                        std::uint64_t b) noexcept {
  return {2 * num_edges * a + 2 * num_nodes * a * b, a * b + b};
}

struct GraphStats {
  std::uint64_t num_nodes = 0;
  std::uint64_t num_edges = 0;
  /// Graphs processed per client per round, for the per-round figure.
  std::uint64_t graphs_per_round = 1;
};

struct ResourceReport {
  std::uint64_t analytic_flops_per_graph = 0;  // forward
  std::uint64_t measured_flops_per_graph = 0;  // forward, instrumented
  std::uint64_t measured_flops_per_round = 0;  // 3 x forward x graphs_per_round
  std::uint64_t param_count_total = 0;
  std::uint64_t param_count_structural = 0;
  std::uint64_t param_count_shared = 0;
  std::uint64_t model_size_bytes = 0;
  std::uint64_t payload_bytes_per_round = 0;

  friend bool operator==(const ResourceReport&, const ResourceReport&) = default;
};

inline nlohmann::json to_json(const ResourceReport& r) {
  return {{"analytic_flops_per_graph", r.analytic_flops_per_graph},
          {"measured_flops_per_graph", r.measured_flops_per_graph},
          {"measured_flops_per_round", r.measured_flops_per_round},
          {"param_count_total", r.param_count_total},
          {"param_count_structural", r.param_count_structural},
          {"param_count_shared", r.param_count_shared},
          {"model_size_bytes", r.model_size_bytes},
          {"payload_bytes_per_round", r.payload_bytes_per_round}};
}

struct AnalyticModel {
  std::uint64_t forward_flops = 0;
  std::uint64_t params_total = 0;
  std::uint64_t params_structural = 0;
};

/// Closed-form forward FLOPs and parameter counts of a model on one graph.
inline AnalyticModel analytic_model(const ModelConfig& cfg, const GraphStats& g) {
  cfg.validate();
  const std::uint64_t V = g.num_nodes, E = g.num_edges;
  const std::uint64_t r = cfg.hidden, L = cfg.num_layers, C = cfg.num_classes;
  const std::uint64_t F = cfg.feature_dim, S = cfg.struct_dim;
  AnalyticModel m;
  auto add = [&](LayerCost c, bool structural) {
    m.forward_flops += c.flops;
    m.params_total += c.params;
    if (structural) m.params_structural += c.params;
  };
  add(analytic_layer_cost(V, 0, F, r), false);  // feature init
  if (cfg.has_struct_channel()) add(analytic_layer_cost(V, 0, S, r), true);
  for (std::uint64_t l = 1; l <= L; ++l) {
    std::uint64_t a = 0;
    switch (cfg.variant) {
      case ModelVariant::ddc:
        a = 2 * l * r;
        m.forward_flops += V * a;  // H_x and H_s over the two concatenated blocks
        break;
      case ModelVariant::decoupled:
        a = l == 1 ? 2 * r : r;
        m.forward_flops += V * a;
        break;
      case ModelVariant::single:
        a = r;
        m.forward_flops += V * a;
        break;
    }
    add(analytic_layer_cost(V, E, a, r), false);
    if (cfg.has_struct_channel()) {
      m.forward_flops += V * r;  // activation feeding the GCN layer
      add(analytic_layer_cost(V, E, r, r), true);
    }
  }
  const std::uint64_t emb = cfg.embedding_width();
  m.forward_flops += V * emb;  // mean pooling
  add(analytic_layer_cost(1, 0, emb, C), false);
  return m;
}

/// Parameter count of the tensors a client uploads per round.
inline std::uint64_t analytic_shared_params(const ModelConfig& cfg, Strategy strategy, const AnalyticModel& m) {
  switch (strategy) {
    case Strategy::local: return 0;
    case Strategy::feddense:
      if (!cfg.has_struct_channel()) throw UnsupportedVariant("feddense needs a structural channel");
      return m.params_structural;
    case Strategy::fedavg:
    case Strategy::fedprox: return m.params_total;
  }
  return 0;
}

/// Some simple graph with exactly the requested node and edge counts.
inline Graph stand_in_graph(std::size_t num_nodes, std::size_t num_edges, std::size_t feature_dim) {
  if (num_nodes == 0) throw InvalidArgument("graph stats need at least one node");
  if (num_edges > num_nodes * (num_nodes - 1) / 2) throw InvalidArgument("too many edges for a simple graph");
  std::vector<Edge> edges;
  for (NodeId i = 0; i < num_nodes && edges.size() < num_edges; ++i) {
    for (NodeId j = i + 1; j < num_nodes && edges.size() < num_edges; ++j) edges.push_back({i, j});
  }
  return Graph(num_nodes, std::move(edges), std::vector<double>(num_nodes * feature_dim, 1.0), feature_dim);
}

/// Forward FLOPs counted by the instrumented primitives for one eval pass.
inline std::uint64_t measured_forward_flops(const ModelConfig& cfg, const nn::ParameterSet<float>& params,
                                            const Graph& g, const StructEncodingConfig& enc) {
  Matrix s;
  if (cfg.has_struct_channel()) s = build_structural_vectors(g, enc);
  auto batch = make_batch(g, cfg.has_struct_channel() ? &s : nullptr);
  auto bound = bind(params, false);
  Rng rng(0);
  nn::FlopCounter counter;
  {
    nn::FlopScope scope(counter);
    forward(batch, bound, cfg, Mode::eval, rng);
  }
  return counter.total();
}

inline ResourceReport model_report(const ModelConfig& cfg, Strategy strategy, const GraphStats& stats,
                                   const StructEncodingConfig& enc = {}) {
  ModelConfig c = cfg;
  if (c.has_struct_channel() && c.struct_dim != enc.width()) {
    throw ConfigError("struct_dim " + std::to_string(c.struct_dim) + " != encoding width " + std::to_string(enc.width()));
  }
  const auto m = analytic_model(c, stats);
  ResourceReport r;
  r.analytic_flops_per_graph = m.forward_flops;
  r.param_count_total = m.params_total;
  r.param_count_structural = m.params_structural;
  r.param_count_shared = analytic_shared_params(c, strategy, m);
  r.model_size_bytes = 4 * r.param_count_total;
  r.payload_bytes_per_round = 4 * r.param_count_shared;

  auto params = init_params<float>(c, 0);
  if (params.count() != m.params_total) {
    throw ConfigError("instantiated parameter count disagrees with the analytic count");
  }
  auto g = stand_in_graph(stats.num_nodes, stats.num_edges, c.feature_dim);
  r.measured_flops_per_graph = measured_forward_flops(c, params, g, enc);
  r.measured_flops_per_round = 3 * r.measured_flops_per_graph * stats.graphs_per_round;
  return r;
}

}  // namespace feddense
