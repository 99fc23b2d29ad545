#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "feddense/error.hpp"
#include "feddense/rng.hpp"

namespace feddense {

using NodeId = std::uint32_t;

/// Undirected edge, stored with first < second.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Simple undirected graph with per-node real feature rows and a class label.
/// Immutable after construction; adjacency is kept in CSR form with each
/// neighbor list sorted ascending.
class Graph {
 public:
  Graph() = default;

  /// Edges may be given in either orientation and may repeat; they are
  /// normalized and deduplicated. Self-loops and out-of-range endpoints are
  /// rejected.
  Graph(std::size_t num_nodes, std::vector<Edge> edges, std::vector<double> features,
        std::size_t feature_dim, std::size_t label = 0)
      : num_nodes_(num_nodes),
        feature_dim_(feature_dim),
        label_(label),
        features_(std::move(features)) {
    if (num_nodes_ == 0) throw InvalidArgument("graph must have at least one node");
    if (features_.size() != num_nodes_ * feature_dim_) {
      throw ShapeError("feature matrix has " + std::to_string(features_.size()) +
                       " values, expected " + std::to_string(num_nodes_) + "x" +
                       std::to_string(feature_dim_));
    }
    for (auto& e : edges) {
      if (e.u >= num_nodes_ || e.v >= num_nodes_) {
        throw IndexError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                         ") out of range for " + std::to_string(num_nodes_) + " nodes");
      }
      if (e.u == e.v) throw InvalidArgument("self-loop at node " + std::to_string(e.u));
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges_ = std::move(edges);
    build_adjacency();
  }

  std::size_t num_nodes() const noexcept { return num_nodes_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::size_t feature_dim() const noexcept { return feature_dim_; }
  std::size_t label() const noexcept { return label_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::span<const double> features() const noexcept { return features_; }

  std::span<const double> feature_row(std::size_t v) const {
    check_node(v);
    return std::span<const double>(features_).subspan(v * feature_dim_, feature_dim_);
  }

  /// Sorted neighbor list of v.
  std::span<const NodeId> neighbors(std::size_t v) const {
    check_node(v);
    return std::span<const NodeId>(adjacency_).subspan(offsets_[v], offsets_[v + 1] - offsets_[v]);
  }

  std::size_t degree(std::size_t v) const {
    check_node(v);
    return offsets_[v + 1] - offsets_[v];
  }

  bool has_edge(std::size_t u, std::size_t v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), static_cast<NodeId>(v));
  }

  /// Copy with a different label.
  Graph with_label(std::size_t label) const {
    Graph g = *this;
    g.label_ = label;
    return g;
  }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  void check_node(std::size_t v) const {
    if (v >= num_nodes_) {
      throw IndexError("node " + std::to_string(v) + " out of range for " +
                       std::to_string(num_nodes_) + " nodes");
    }
  }

  void build_adjacency() {
    offsets_.assign(num_nodes_ + 1, 0);
    for (const auto& e : edges_) {
      ++offsets_[e.u + 1];
      ++offsets_[e.v + 1];
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    adjacency_.assign(2 * edges_.size(), 0);
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (const auto& e : edges_) {
      adjacency_[cursor[e.u]++] = e.v;
      adjacency_[cursor[e.v]++] = e.u;
    }
    for (std::size_t v = 0; v < num_nodes_; ++v) {
      std::sort(adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]),
                adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[v + 1]));
    }
  }

  std::size_t num_nodes_ = 0;
  std::size_t feature_dim_ = 0;
  std::size_t label_ = 0;
  std::vector<Edge> edges_;
  std::vector<double> features_;
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> adjacency_;
};

/// Free-function form of Graph::neighbors.
inline std::span<const NodeId> neighbors(const Graph& g, std::size_t v) { return g.neighbors(v); }

/// Nodes of all graphs laid out consecutively, with edges offset accordingly.
/// Labels are dropped (the union carries label 0).
inline Graph disjoint_union(std::span<const Graph* const> parts) {
  if (parts.empty()) throw InvalidArgument("disjoint_union of zero graphs");
  const std::size_t fdim = parts.front()->feature_dim();
  std::size_t n = 0, m = 0;
  for (const Graph* g : parts) {
    if (g->feature_dim() != fdim) throw ShapeError("disjoint_union: feature_dim mismatch");
    n += g->num_nodes();
    m += g->num_edges();
  }
  std::vector<Edge> edges;
  edges.reserve(m);
  std::vector<double> features;
  features.reserve(n * fdim);
  NodeId base = 0;
  for (const Graph* g : parts) {
    for (const auto& e : g->edges()) edges.push_back({e.u + base, e.v + base});
    features.insert(features.end(), g->features().begin(), g->features().end());
    base += static_cast<NodeId>(g->num_nodes());
  }
  return Graph(n, std::move(edges), std::move(features), fdim, 0);
}

struct GraphDataset {
  std::string name;
  std::vector<Graph> graphs;
  std::size_t num_classes = 0;
  std::size_t feature_dim = 0;
  /// Self-loops found (and dropped) while ingesting raw files.
  std::size_t dropped_self_loops = 0;

  std::size_t size() const noexcept { return graphs.size(); }

  void validate() const {
    if (graphs.empty()) throw InvalidArgument("dataset '" + name + "' is empty");
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      if (graphs[i].label() >= num_classes) {
        throw InvalidArgument("graph " + std::to_string(i) + " label " +
                              std::to_string(graphs[i].label()) + " >= num_classes " +
                              std::to_string(num_classes));
      }
      if (graphs[i].feature_dim() != feature_dim) {
        throw ShapeError("graph " + std::to_string(i) + " feature_dim " +
                         std::to_string(graphs[i].feature_dim()) + " != dataset feature_dim " +
                         std::to_string(feature_dim));
      }
    }
  }

  friend bool operator==(const GraphDataset&, const GraphDataset&) = default;
};

struct SplitDataset {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;

  std::size_t size() const noexcept { return train.size() + val.size() + test.size(); }
  friend bool operator==(const SplitDataset&, const SplitDataset&) = default;
};

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
  friend bool operator==(const SplitRatios&, const SplitRatios&) = default;
};

/// Seeded permutation of [0, n) cut into train/val/test. Sizes are
/// floor(n * ratio) with the leftover handed out one at a time to train,
/// then val (at most two graphs remain).
inline SplitDataset split_indices(std::size_t n, const SplitRatios& ratios, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("cannot split an empty dataset");
  if (!(ratios.train > 0 && ratios.val > 0 && ratios.test > 0)) {
    throw InvalidArgument("split ratios must be positive");
  }
  if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw InvalidArgument("split ratios must sum to 1");
  }
  const double r[3] = {ratios.train, ratios.val, ratios.test};
  std::size_t sizes[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    sizes[i] = static_cast<std::size_t>(std::floor(static_cast<double>(n) * r[i] + 1e-9));
    assigned += sizes[i];
  }
  for (int i = 0; assigned < n; i = (i + 1) % 2, ++assigned) ++sizes[i];

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng = make_rng({seed, 0x5b1fULL});
  shuffle(perm.begin(), perm.end(), rng);

  SplitDataset out;
  auto first = perm.begin();
  auto take = [&](std::vector<std::size_t>& dst, std::size_t k) {
    dst.assign(first, first + static_cast<std::ptrdiff_t>(k));
    std::sort(dst.begin(), dst.end());
    first += static_cast<std::ptrdiff_t>(k);
  };
  take(out.train, sizes[0]);
  take(out.val, sizes[1]);
  take(out.test, sizes[2]);
  return out;
}

inline SplitDataset split_dataset(const GraphDataset& ds, const SplitRatios& ratios,
                                  std::uint64_t seed) {
  if (ds.graphs.empty()) throw InvalidArgument("cannot split an empty dataset");
  return split_indices(ds.size(), ratios, seed);
}

// ---------------------------------------------------------------------------
// Synthetic generators

enum class SyntheticKind { cycle, path, star, erdos_renyi };
enum class FeatureMode { constant, random, degree };

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::cycle;
  std::size_t n_nodes = 1;
  FeatureMode feature_mode = FeatureMode::constant;
  /// Width of constant/random features; degree features are always 1-dim.
  std::size_t feature_dim = 1;
  double edge_prob = 0.5;
  std::size_t label = 0;
};

/// Deterministic given seed. A cycle on fewer than three nodes degenerates to
/// the path on the same nodes.
inline Graph generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  const std::size_t n = spec.n_nodes;
  if (n == 0) throw InvalidArgument("n_nodes must be >= 1");
  if (spec.kind == SyntheticKind::erdos_renyi && !(spec.edge_prob >= 0.0 && spec.edge_prob <= 1.0)) {
    throw InvalidArgument("edge probability must be in [0,1]");
  }
  if (spec.feature_mode != FeatureMode::degree && spec.feature_dim == 0) {
    throw InvalidArgument("feature_dim must be >= 1");
  }
  Rng rng = make_rng({seed, 0x9e7aULL});
  std::vector<Edge> edges;
  auto id = [](std::size_t i) { return static_cast<NodeId>(i); };
  switch (spec.kind) {
    case SyntheticKind::path:
      for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({id(i), id(i + 1)});
      break;
    case SyntheticKind::cycle:
      for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({id(i), id(i + 1)});
      if (n >= 3) edges.push_back({0, id(n - 1)});
      break;
    case SyntheticKind::star:
      for (std::size_t i = 1; i < n; ++i) edges.push_back({0, id(i)});
      break;
    case SyntheticKind::erdos_renyi:
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (uniform01(rng) < spec.edge_prob) edges.push_back({id(i), id(j)});
        }
      }
      break;
  }

  std::vector<std::size_t> degree(n, 0);
  for (const auto& e : edges) {
    ++degree[e.u];
    ++degree[e.v];
  }
  std::size_t fdim = spec.feature_mode == FeatureMode::degree ? 1 : spec.feature_dim;
  std::vector<double> features(n * fdim);
  switch (spec.feature_mode) {
    case FeatureMode::constant:
      std::fill(features.begin(), features.end(), 1.0);
      break;
    case FeatureMode::random:
      for (auto& f : features) f = uniform01(rng);
      break;
    case FeatureMode::degree:
      for (std::size_t v = 0; v < n; ++v) features[v] = static_cast<double>(degree[v]);
      break;
  }
  return Graph(n, std::move(edges), std::move(features), fdim, spec.label);
}

inline Graph generate_synthetic(SyntheticKind kind, std::size_t n_nodes, FeatureMode mode,
                                std::uint64_t seed) {
  SyntheticSpec spec;
  spec.kind = kind;
  spec.n_nodes = n_nodes;
  spec.feature_mode = mode;
  return generate_synthetic(spec, seed);
}

inline const char* to_string(SyntheticKind k) {
  switch (k) {
    case SyntheticKind::cycle: return "cycle";
    case SyntheticKind::path: return "path";
    case SyntheticKind::star: return "star";
    case SyntheticKind::erdos_renyi: return "erdos_renyi";
  }
  return "?";
}

inline const char* to_string(FeatureMode m) {
  switch (m) {
    case FeatureMode::constant: return "constant";
    case FeatureMode::random: return "random";
    case FeatureMode::degree: return "degree";
  }
  return "?";
}

inline SyntheticKind parse_synthetic_kind(const std::string& s) {
  if (s == "cycle") return SyntheticKind::cycle;
  if (s == "path") return SyntheticKind::path;
  if (s == "star") return SyntheticKind::star;
  if (s == "erdos_renyi") return SyntheticKind::erdos_renyi;
  throw InvalidArgument("unknown synthetic kind '" + s + "'");
}

inline FeatureMode parse_feature_mode(const std::string& s) {
  if (s == "constant") return FeatureMode::constant;
  if (s == "random") return FeatureMode::random;
  if (s == "degree") return FeatureMode::degree;
  throw InvalidArgument("unknown feature mode '" + s + "'");
}

}  // namespace feddense
