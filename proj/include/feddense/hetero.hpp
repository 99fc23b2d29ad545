#pragma once

// Cross-dataset heterogeneity: per-dataset feature-similarity and
// structure histograms compared pairwise by Jensen-Shannon divergence.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "feddense/error.hpp"
#include "feddense/graph.hpp"
#include "feddense/matrix.hpp"
#include "feddense/struct_encode.hpp"

namespace feddense {

struct EmpiricalDistribution {
  std::vector<double> bin_edges;  // sorted, size = probabilities.size() + 1
  std::vector<double> probabilities;

  friend bool operator==(const EmpiricalDistribution&, const EmpiricalDistribution&) = default;
};

struct HeteroBins {
  std::size_t similarity = 20;
  std::size_t degree = 16;
  std::size_t clustering = 10;
  friend bool operator==(const HeteroBins&, const HeteroBins&) = default;
};

namespace hetero_detail {

inline std::vector<double> uniform_edges(double lo, double hi, std::size_t bins) {
  std::vector<double> e(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  e.back() = hi;
  return e;
}

/// Equal-width bin over [lo, hi]; values at hi land in the last bin.
inline std::size_t bin_index(double x, double lo, double hi, std::size_t bins) {
  x = std::clamp(x, lo, hi);
  auto i = static_cast<std::size_t>(std::floor((x - lo) / (hi - lo) * static_cast<double>(bins)));
  return std::min(i, bins - 1);
}

inline void normalize(std::vector<double>& counts) {
  double total = 0;
  for (double c : counts) total += c;
  if (total > 0) {
    for (double& c : counts) c /= total;
  }
}

}  // namespace hetero_detail

/// Cosine similarity; 0 if either vector is zero.
inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

/// Histogram over [-1, 1] of cosine similarity of features across every edge.
inline EmpiricalDistribution feature_similarity_distribution(const GraphDataset& ds, std::size_t bins) {
  if (bins < 2) throw InvalidArgument("need at least 2 similarity bins");
  if (ds.feature_dim == 0) throw AnalysisError("dataset '" + ds.name + "' has no node features");
  EmpiricalDistribution d;
  d.bin_edges = hetero_detail::uniform_edges(-1.0, 1.0, bins);
  d.probabilities.assign(bins, 0.0);
  std::size_t edges = 0;
  for (const auto& g : ds.graphs) {
    for (const auto& e : g.edges()) {
      double s = cosine_similarity(g.feature_row(e.u), g.feature_row(e.v));
      d.probabilities[hetero_detail::bin_index(s, -1.0, 1.0, bins)] += 1.0;
      ++edges;
    }
  }
  if (edges == 0) throw AnalysisError("dataset '" + ds.name + "' has no edges");
  hetero_detail::normalize(d.probabilities);
  return d;
}

/// Degree histogram (degrees clipped to degree_bins - 1) followed by a
/// clustering-coefficient histogram over [0, 1], each normalized, then the
/// concatenation renormalized. Edges: [0..degree_bins] then the clustering
/// axis shifted by degree_bins.
inline EmpiricalDistribution structure_distribution(const GraphDataset& ds, std::size_t degree_bins,
                                                    std::size_t cc_bins) {
  if (degree_bins < 2 || cc_bins < 2) throw InvalidArgument("need at least 2 degree and clustering bins");
  if (ds.graphs.empty()) throw AnalysisError("dataset '" + ds.name + "' is empty");
  std::vector<double> deg(degree_bins, 0.0), cc(cc_bins, 0.0);
  for (const auto& g : ds.graphs) {
    for (std::size_t v = 0; v < g.num_nodes(); ++v) {
      deg[std::min(g.degree(v), degree_bins - 1)] += 1.0;
      cc[hetero_detail::bin_index(clustering_coefficient(g, v), 0.0, 1.0, cc_bins)] += 1.0;
    }
  }
  hetero_detail::normalize(deg);
  hetero_detail::normalize(cc);
  EmpiricalDistribution d;
  for (std::size_t i = 0; i <= degree_bins; ++i) d.bin_edges.push_back(static_cast<double>(i));
  auto cc_edges = hetero_detail::uniform_edges(0.0, 1.0, cc_bins);
  for (std::size_t i = 1; i < cc_edges.size(); ++i) d.bin_edges.push_back(static_cast<double>(degree_bins) + cc_edges[i]);
  d.probabilities = deg;
  d.probabilities.insert(d.probabilities.end(), cc.begin(), cc.end());
  hetero_detail::normalize(d.probabilities);
  return d;
}

/// Base-2 Jensen-Shannon divergence, in [0, 1].
inline double js_divergence(const EmpiricalDistribution& p, const EmpiricalDistribution& q) {
  if (p.bin_edges != q.bin_edges || p.probabilities.size() != q.probabilities.size()) {
    throw InvalidArgument("js_divergence: distributions use different binning");
  }
  double js = 0;
  for (std::size_t i = 0; i < p.probabilities.size(); ++i) {
    const double a = p.probabilities[i], b = q.probabilities[i];
    const double m = 0.5 * (a + b);
    const double ta = a > 0 ? 0.5 * a * std::log2(a / m) : 0.0;
    const double tb = b > 0 ? 0.5 * b * std::log2(b / m) : 0.0;
    js += ta + tb;  // symmetric in (a, b)
  }
  return std::clamp(js, 0.0, 1.0);
}

enum class HeteroMode { feature, structure };

inline EmpiricalDistribution distribution_of(const GraphDataset& ds, HeteroMode mode, const HeteroBins& bins) {
  return mode == HeteroMode::feature ? feature_similarity_distribution(ds, bins.similarity)
                                     : structure_distribution(ds, bins.degree, bins.clustering);
}

/// Symmetric matrix of pairwise divergences with a zero diagonal.
inline Matrix heatmap(const std::vector<GraphDataset>& datasets, HeteroMode mode, const HeteroBins& bins = {}) {
  if (datasets.size() < 2) throw AnalysisError("heatmap needs at least two datasets");
  std::vector<EmpiricalDistribution> dists;
  dists.reserve(datasets.size());
  for (const auto& ds : datasets) dists.push_back(distribution_of(ds, mode, bins));
  const std::size_t n = datasets.size();
  Matrix m(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) m(i, j) = m(j, i) = js_divergence(dists[i], dists[j]);
  }
  return m;
}

}  // namespace feddense
