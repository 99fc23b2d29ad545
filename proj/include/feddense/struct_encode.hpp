#pragma once

// Per-node structural vectors: [degree one-hot | random-walk return
// probabilities], plus the clustering coefficient used by hetero analysis.

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "feddense/error.hpp"
#include "feddense/graph.hpp"
#include "feddense/matrix.hpp"

namespace feddense {

enum class StructFusion { concat };

struct StructEncodingConfig {
  std::size_t degree_dim = 16;
  std::size_t rwpe_dim = 16;
  StructFusion fusion = StructFusion::concat;

  std::size_t width() const noexcept { return degree_dim + rwpe_dim; }

  void validate() const {
    if (degree_dim < 1) throw InvalidArgument("degree_dim must be >= 1");
  }

  friend bool operator==(const StructEncodingConfig&, const StructEncodingConfig&) = default;
};

/// One-hot of min(degree(v), dim - 1).
inline std::vector<double> degree_onehot(const Graph& g, std::size_t v, std::size_t dim) {
  if (dim < 1) throw InvalidArgument("degree one-hot dim must be >= 1");
  std::vector<double> out(dim, 0.0);
  out[std::min(g.degree(v), dim - 1)] = 1.0;
  return out;
}

/// Entry j-1 is the probability that a uniform random walk from v is back at
/// v after exactly j steps, i.e. the (v,v) entry of (A D^-1)^j. Isolated nodes
/// get zeros. Cost O(k |E|): the walk distribution is propagated from e_v.
inline std::vector<double> rwpe(const Graph& g, std::size_t v, std::size_t k) {
  if (k < 1) throw InvalidArgument("rwpe length must be >= 1");
  std::vector<double> out(k, 0.0);
  if (g.degree(v) == 0) return out;
  const std::size_t n = g.num_nodes();
  std::vector<double> p(n, 0.0), next(n, 0.0), inv_deg(n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    if (auto d = g.degree(u)) inv_deg[u] = 1.0 / static_cast<double>(d);
  }
  p[v] = 1.0;
  for (std::size_t step = 0; step < k; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t w = 0; w < n; ++w) {
      if (p[w] == 0.0) continue;
      const double share = p[w] * inv_deg[w];
      for (NodeId u : g.neighbors(w)) next[u] += share;
    }
    std::swap(p, next);
    out[step] = p[v];
  }
  return out;
}

/// Row v = concat(degree_onehot(v), rwpe(v)).
inline Matrix build_structural_vectors(const Graph& g, const StructEncodingConfig& cfg) {
  cfg.validate();
  Matrix out(g.num_nodes(), cfg.width());
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    auto row = out.row(v);
    auto deg = degree_onehot(g, v, cfg.degree_dim);
    std::copy(deg.begin(), deg.end(), row.begin());
    if (cfg.rwpe_dim > 0) {
      auto rw = rwpe(g, v, cfg.rwpe_dim);
      std::copy(rw.begin(), rw.end(), row.begin() + static_cast<std::ptrdiff_t>(cfg.degree_dim));
    }
  }
  return out;
}

/// 2 T(v) / (deg (deg - 1)), T(v) = edges among neighbors of v; 0 if deg < 2.
inline double clustering_coefficient(const Graph& g, std::size_t v) {
  auto nb = g.neighbors(v);
  const std::size_t d = nb.size();
  if (d < 2) return 0.0;
  std::size_t triangles = 0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      if (g.has_edge(nb[i], nb[j])) ++triangles;
    }
  }
  return 2.0 * static_cast<double>(triangles) / (static_cast<double>(d) * static_cast<double>(d - 1));
}

}  // namespace feddense
