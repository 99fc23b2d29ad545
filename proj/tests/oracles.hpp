#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Everything here is written against dense matrices and plain loops.

#include <algorithm>
#include <cmath>
#include <string>
#include <functional>
#include <vector>

#include "feddense/feddense.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense zeros(std::size_t r, std::size_t c) { return Dense(r, std::vector<double>(c, 0.0)); }

inline Dense adjacency(const feddense::Graph& g) {
  Dense a = zeros(g.num_nodes(), g.num_nodes());
  for (const auto& e : g.edges()) a[e.u][e.v] = a[e.v][e.u] = 1.0;
  return a;
}

inline Dense matmul(const Dense& a, const Dense& b) {
  Dense c = zeros(a.size(), b.empty() ? 0 : b[0].size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < c[i].size(); ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

/// Random-walk matrix A D^-1 with zero columns for isolated nodes.
inline Dense walk_matrix(const feddense::Graph& g) {
  Dense a = adjacency(g);
  const std::size_t n = a.size();
  for (std::size_t j = 0; j < n; ++j) {
    double d = 0;
    for (std::size_t i = 0; i < n; ++i) d += a[i][j];
    for (std::size_t i = 0; i < n; ++i) a[i][j] = d > 0 ? a[i][j] / d : 0.0;
  }
  return a;
}

/// diag((A D^-1)^j)[v] for j = 1..k.
inline std::vector<double> rwpe(const feddense::Graph& g, std::size_t v, std::size_t k) {
  const Dense rw = walk_matrix(g);
  Dense p = rw;
  std::vector<double> out;
  for (std::size_t j = 1; j <= k; ++j) {
    out.push_back(p[v][v]);
    p = matmul(p, rw);
  }
  return out;
}

/// D^-1/2 (A + I) D^-1/2 with D the degree of A + I.
inline Dense gcn_operator(const feddense::Graph& g) {
  Dense a = adjacency(g);
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) a[i][i] = 1.0;
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i] += a[i][j];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] /= std::sqrt(d[i] * d[j]);
  return a;
}

inline Dense to_dense(const std::vector<double>& flat, std::size_t rows, std::size_t cols) {
  Dense m = zeros(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m[i][j] = flat[i * cols + j];
  return m;
}

template <class T>
Dense to_dense(const feddense::nn::Tensor<T>& t) {
  Dense m = zeros(t.rows(), t.cols());
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) m[i][j] = static_cast<double>(t.data()[i * t.cols() + j]);
  return m;
}

/// Element i of the brute-force weighted mean of tensor `t`.
inline double weighted_mean(const std::vector<feddense::nn::ParameterSet<float>>& sets,
                            const std::vector<std::size_t>& samples, std::size_t t, std::size_t i) {
  double total = 0, acc = 0;
  for (std::size_t c = 0; c < sets.size(); ++c) total += static_cast<double>(samples[c]);
  for (std::size_t c = 0; c < sets.size(); ++c) {
    acc += static_cast<double>(samples[c]) * static_cast<double>(sets[c].tensors[t].values[i]);
  }
  return acc / total;
}

/// Base-2 JSD from the KL definition.
inline double jsd(const std::vector<double>& p, const std::vector<double>& q) {
  auto kl = [](const std::vector<double>& a, const std::vector<double>& m) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] > 0) s += a[i] * std::log2(a[i] / m[i]);
    }
    return s;
  };
  std::vector<double> m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
  return 0.5 * kl(p, m) + 0.5 * kl(q, m);
}

/// Central-difference gradient of f with respect to every entry of x.
inline std::vector<double> numeric_grad(std::vector<double>& x, const std::function<double()>& f, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double fp = f();
    x[i] = keep - h;
    const double fm = f();
    x[i] = keep;
    g[i] = (fp - fm) / (2 * h);
  }
  return g;
}

/// ||a - b|| / max(||a||, ||b||); 0 when both vanish.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale == 0 ? 0.0 : std::sqrt(d) / scale;
}


// Dense re-statement of the model forward (eval mode, no dropout).
namespace model {

inline Dense affine(const Dense& x, const feddense::nn::ParamTensor<double>& W, const feddense::nn::ParamTensor<double>& b) {
  Dense y = matmul(x, to_dense(W.values, W.shape[0], W.shape[1]));
  for (auto& row : y)
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += b.values[j];
  return y;
}

inline Dense relu(Dense x) {
  for (auto& row : x)
    for (auto& v : row) v = std::max(v, 0.0);
  return x;
}

inline Dense hcat(const std::vector<Dense>& parts) {
  Dense out(parts.front().size());
  for (const auto& p : parts)
    for (std::size_t i = 0; i < out.size(); ++i) out[i].insert(out[i].end(), p[i].begin(), p[i].end());
  return out;
}

inline Dense gin(const feddense::Graph& g, const Dense& h, double eps) {
  Dense a = adjacency(g);
  for (std::size_t i = 0; i < a.size(); ++i) a[i][i] += 1.0 + eps;
  return matmul(a, h);
}

inline Dense col_mean(const Dense& h) {
  Dense out = zeros(1, h.front().size());
  for (const auto& row : h)
    for (std::size_t j = 0; j < row.size(); ++j) out[0][j] += row[j] / static_cast<double>(h.size());
  return out;
}

/// Logits [1 x C] of one graph.
inline std::vector<double> logits(const feddense::Graph& g, const Dense& x, const Dense& s,
                                  const feddense::nn::ParameterSet<double>& p, const feddense::ModelConfig& cfg) {
  auto P = [&](const std::string& n) -> const feddense::nn::ParamTensor<double>& { return p.at(n); };
  auto layer = [](const char* ch, std::size_t l, const char* what) {
    return std::string(ch) + "." + std::to_string(l) + "." + what;
  };
  std::vector<Dense> xs = {affine(x, P("feature_init.weight"), P("feature_init.bias"))};
  std::vector<Dense> ss;
  const bool structural = cfg.variant != feddense::ModelVariant::single;
  if (structural) ss.push_back(affine(s, P("struct_init.weight"), P("struct_init.bias")));
  for (std::size_t l = 1; l <= cfg.num_layers; ++l) {
    Dense in;
    if (cfg.variant == feddense::ModelVariant::ddc) {
      in = hcat({relu(hcat(xs)), relu(hcat(ss))});
    } else if (cfg.variant == feddense::ModelVariant::decoupled && l == 1) {
      in = relu(hcat({xs[0], ss[0]}));
    } else {
      in = relu(xs.back());
    }
    Dense xn = affine(gin(g, in, cfg.gin_epsilon), P(layer("feature_layers", l, "weight")), P(layer("feature_layers", l, "bias")));
    if (structural) {
      ss.push_back(affine(matmul(gcn_operator(g), relu(ss.back())), P(layer("struct_layers", l, "weight")),
                          P(layer("struct_layers", l, "bias"))));
    }
    xs.push_back(xn);
  }
  std::vector<Dense> readout;
  if (cfg.variant == feddense::ModelVariant::ddc) {
    readout.assign(xs.begin() + 1, xs.end());
    readout.insert(readout.end(), ss.begin() + 1, ss.end());
  } else if (cfg.variant == feddense::ModelVariant::decoupled) {
    readout = {xs.back(), ss.back()};
  } else {
    readout = {xs.back()};
  }
  Dense out = affine(col_mean(hcat(readout)), P("classifier.weight"), P("classifier.bias"));
  return out[0];
}

inline double cross_entropy(const std::vector<double>& z, std::size_t label) {
  double mx = *std::max_element(z.begin(), z.end()), s = 0;
  for (double v : z) s += std::exp(v - mx);
  return -(z[label] - mx - std::log(s));
}

}  // namespace model

}  // namespace oracle
