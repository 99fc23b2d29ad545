#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "feddense/error.hpp"
#include "feddense/graph.hpp"
#include "feddense/nn/tensor.hpp"
#include "feddense/rng.hpp"

namespace feddense::nn {

namespace detail {

inline void count_linear(std::size_t n, std::size_t a, std::size_t b) {
  if (auto* c = active_flop_counter()) c->linear += 2ULL * n * a * b;
}
inline void count_aggregation(std::size_t edges, std::size_t a) {
  if (auto* c = active_flop_counter()) c->aggregation += 2ULL * edges * a;
}
inline void count_elementwise(std::size_t n) {
  if (auto* c = active_flop_counter()) c->elementwise += n;
}

template <class T>
void require_matrix(const Tensor<T>& t, const char* op, const char* what) {
  if (t.rank() != 2) {
    throw ShapeError(std::string(op) + ": " + what + " must be a matrix, got " + shape_str(t.shape()));
  }
}

}  // namespace detail

/// y = x W + bias. x is [n x a] (or a vector [a], giving [b]); W is [a x b].
template <class T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& W, const Tensor<T>& bias) {
  detail::require_matrix(W, "linear", "W");
  const std::size_t a = W.shape()[0], b = W.shape()[1];
  if (x.rank() == 0 || x.rank() > 2 || x.cols() != a) {
    throw ShapeError("linear: x " + shape_str(x.shape()) + " incompatible with W " + shape_str(W.shape()));
  }
  if (bias.rank() != 1 || bias.numel() != b) {
    throw ShapeError("linear: bias " + shape_str(bias.shape()) + " incompatible with W " +
                     shape_str(W.shape()));
  }
  const std::size_t n = x.rows();
  std::vector<T> y(n * b);
  auto xv = x.data(), wv = W.data(), bv = bias.data();
  for (std::size_t i = 0; i < n; ++i) {
    T* yr = y.data() + i * b;
    std::copy(bv.begin(), bv.end(), yr);
    for (std::size_t k = 0; k < a; ++k) {
      const T xik = xv[i * a + k];
      if (xik == T(0)) continue;
      const T* wr = wv.data() + k * b;
      for (std::size_t j = 0; j < b; ++j) yr[j] += xik * wr[j];
    }
  }
  detail::count_linear(n, a, b);
  Shape out_shape = x.rank() == 2 ? Shape{n, b} : Shape{b};
  return make_result<T>(std::move(out_shape), std::move(y), {x, W, bias}, [n, a, b](Node<T>& out) {
    auto& X = *out.parents[0];
    auto& Wn = *out.parents[1];
    auto& B = *out.parents[2];
    const auto& dy = out.grad;
    if (X.requires_grad) {
      auto& dx = X.ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < a; ++k) {
          T acc = 0;
          const T* wr = Wn.value.data() + k * b;
          const T* dyr = dy.data() + i * b;
          for (std::size_t j = 0; j < b; ++j) acc += dyr[j] * wr[j];
          dx[i * a + k] += acc;
        }
      }
    }
    if (Wn.requires_grad) {
      auto& dw = Wn.ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        const T* dyr = dy.data() + i * b;
        for (std::size_t k = 0; k < a; ++k) {
          const T xik = X.value[i * a + k];
          if (xik == T(0)) continue;
          T* dwr = dw.data() + k * b;
          for (std::size_t j = 0; j < b; ++j) dwr[j] += xik * dyr[j];
        }
      }
    }
    if (B.requires_grad) {
      auto& db = B.ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < b; ++j) db[j] += dy[i * b + j];
      }
    }
  });
}

/// Symmetric normalized propagation D^-1/2 (A + I) D^-1/2 h with D the degree
/// of A + I. The operator is symmetric, so backward applies it to the gradient.
template <class T>
Tensor<T> gcn_propagate(const Graph& g, const Tensor<T>& h) {
  detail::require_matrix(h, "gcn_conv", "h");
  const std::size_t n = g.num_nodes(), a = h.cols();
  if (h.rows() != n) {
    throw ShapeError("gcn_conv: h " + shape_str(h.shape()) + " for graph with " + std::to_string(n) + " nodes");
  }
  std::vector<T> inv_sqrt(n);
  for (std::size_t v = 0; v < n; ++v) inv_sqrt[v] = T(1) / std::sqrt(static_cast<T>(g.degree(v) + 1));
  auto apply = [&g, n, a, inv_sqrt](std::span<const T> in, std::span<T> out) {
    for (std::size_t v = 0; v < n; ++v) {
      T* o = out.data() + v * a;
      const T self = inv_sqrt[v] * inv_sqrt[v];
      const T* iv = in.data() + v * a;
      for (std::size_t c = 0; c < a; ++c) o[c] += self * iv[c];
      for (NodeId u : g.neighbors(v)) {
        const T w = inv_sqrt[v] * inv_sqrt[u];
        const T* iu = in.data() + static_cast<std::size_t>(u) * a;
        for (std::size_t c = 0; c < a; ++c) o[c] += w * iu[c];
      }
    }
  };
  std::vector<T> out(n * a, T(0));
  apply(h.data(), out);
  detail::count_aggregation(g.num_edges(), a);
  return make_result<T>({n, a}, std::move(out), {h}, [apply](Node<T>& node) {
    auto& H = *node.parents[0];
    apply(node.grad, H.ensure_grad());
  });
}

/// (1 + eps) h_v + sum of neighbor rows.
template <class T>
Tensor<T> gin_aggregate(const Graph& g, const Tensor<T>& h, T epsilon) {
  detail::require_matrix(h, "gin_conv", "h");
  const std::size_t n = g.num_nodes(), a = h.cols();
  if (h.rows() != n) {
    throw ShapeError("gin_conv: h " + shape_str(h.shape()) + " for graph with " + std::to_string(n) + " nodes");
  }
  auto apply = [&g, n, a, epsilon](std::span<const T> in, std::span<T> out) {
    const T self = T(1) + epsilon;
    for (std::size_t v = 0; v < n; ++v) {
      T* o = out.data() + v * a;
      const T* iv = in.data() + v * a;
      for (std::size_t c = 0; c < a; ++c) o[c] += self * iv[c];
      for (NodeId u : g.neighbors(v)) {
        const T* iu = in.data() + static_cast<std::size_t>(u) * a;
        for (std::size_t c = 0; c < a; ++c) o[c] += iu[c];
      }
    }
  };
  std::vector<T> out(n * a, T(0));
  apply(h.data(), out);
  detail::count_aggregation(g.num_edges(), a);
  return make_result<T>({n, a}, std::move(out), {h}, [apply](Node<T>& node) {
    apply(node.grad, node.parents[0]->ensure_grad());
  });
}

/// Aggregated message and updated representation of one message-passing layer.
template <class T>
struct LayerActivation {
  Tensor<T> pre_message;
  Tensor<T> post_update;
};

template <class T>
Tensor<T> gcn_conv(const Graph& g, const Tensor<T>& h, const Tensor<T>& W, const Tensor<T>& bias,
                   LayerActivation<T>* activation = nullptr) {
  auto m = gcn_propagate(g, h);
  auto y = linear(m, W, bias);
  if (activation) *activation = {m, y};
  return y;
}

/// GIN layer with a single linear transform: ((1 + eps) h_v + sum_u h_u) W + bias.
template <class T>
Tensor<T> gin_conv(const Graph& g, const Tensor<T>& h, const Tensor<T>& W, const Tensor<T>& bias,
                   T epsilon = T(0), LayerActivation<T>* activation = nullptr) {
  auto m = gin_aggregate(g, h, epsilon);
  auto y = linear(m, W, bias);
  if (activation) *activation = {m, y};
  return y;
}

/// max(x, 0) followed by inverted dropout in training mode.
template <class T>
Tensor<T> relu_dropout(const Tensor<T>& x, double p, bool training, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw InvalidArgument("dropout probability must be in [0,1), got " + std::to_string(p));
  const std::size_t n = x.numel();
  std::vector<T> scale(n);
  auto xv = x.data();
  const bool drop = training && p > 0.0;
  const T keep_scale = drop ? static_cast<T>(1.0 / (1.0 - p)) : T(1);
  for (std::size_t i = 0; i < n; ++i) {
    T s = xv[i] > T(0) ? keep_scale : T(0);
    if (drop && uniform01(rng) < p) s = T(0);
    scale[i] = s;
  }
  std::vector<T> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = scale[i] == T(0) ? T(0) : xv[i] * scale[i];
  detail::count_elementwise(n);
  return make_result<T>(x.shape(), std::move(y), {x}, [scale = std::move(scale)](Node<T>& node) {
    auto& dx = node.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < scale.size(); ++i) dx[i] += node.grad[i] * scale[i];
  });
}

/// Column-wise concatenation of matrices sharing a row count.
template <class T>
Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols of zero tensors");
  const std::size_t n = parts.front().rows();
  std::size_t total = 0;
  std::vector<std::size_t> widths;
  for (const auto& p : parts) {
    detail::require_matrix(p, "concat_cols", "part");
    if (p.rows() != n) {
      throw ShapeError("concat_cols: row mismatch " + shape_str(parts.front().shape()) + " vs " + shape_str(p.shape()));
    }
    widths.push_back(p.cols());
    total += p.cols();
  }
  if (parts.size() == 1) return parts.front();
  std::vector<T> y(n * total);
  std::size_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto src = parts[k].data();
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(src.data() + i * widths[k], widths[k], y.data() + i * total + off);
    }
    off += widths[k];
  }
  return make_result<T>({n, total}, std::move(y), parts, [n, total, widths](Node<T>& node) {
    std::size_t o = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      auto& P = *node.parents[k];
      if (P.requires_grad) {
        auto& dp = P.ensure_grad();
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t c = 0; c < widths[k]; ++c) dp[i * widths[k] + c] += node.grad[i * total + o + c];
        }
      }
      o += widths[k];
    }
  });
}

/// Mean over row segments [offsets[i], offsets[i+1]); returns [B x d].
template <class T>
Tensor<T> segment_mean_pool(const Tensor<T>& h, std::span<const std::size_t> offsets) {
  detail::require_matrix(h, "mean_pool", "h");
  if (offsets.size() < 2 || offsets.back() != h.rows() || offsets.front() != 0) {
    throw ShapeError("mean_pool: segment offsets do not cover " + shape_str(h.shape()));
  }
  const std::size_t B = offsets.size() - 1, d = h.cols();
  std::vector<std::size_t> off(offsets.begin(), offsets.end());
  std::vector<T> y(B * d, T(0));
  auto hv = h.data();
  for (std::size_t g = 0; g < B; ++g) {
    const std::size_t cnt = off[g + 1] - off[g];
    if (cnt == 0) throw InvalidArgument("mean_pool over an empty node set");
    for (std::size_t i = off[g]; i < off[g + 1]; ++i) {
      for (std::size_t c = 0; c < d; ++c) y[g * d + c] += hv[i * d + c];
    }
    const T inv = T(1) / static_cast<T>(cnt);
    for (std::size_t c = 0; c < d; ++c) y[g * d + c] *= inv;
  }
  detail::count_elementwise(h.numel());
  return make_result<T>({B, d}, std::move(y), {h}, [off, B, d](Node<T>& node) {
    auto& dh = node.parents[0]->ensure_grad();
    for (std::size_t g = 0; g < B; ++g) {
      const T inv = T(1) / static_cast<T>(off[g + 1] - off[g]);
      for (std::size_t i = off[g]; i < off[g + 1]; ++i) {
        for (std::size_t c = 0; c < d; ++c) dh[i * d + c] += node.grad[g * d + c] * inv;
      }
    }
  });
}

/// Column means of [n x d], giving [d].
template <class T>
Tensor<T> mean_pool(const Tensor<T>& h) {
  detail::require_matrix(h, "mean_pool", "h");
  if (h.rows() == 0) throw InvalidArgument("mean_pool over zero rows");
  const std::size_t offs[2] = {0, h.rows()};
  auto pooled = segment_mean_pool(h, std::span<const std::size_t>(offs, 2));
  const std::size_t d = h.cols();
  return make_result<T>({d}, std::vector<T>(pooled.data().begin(), pooled.data().end()), {pooled},
                        [](Node<T>& node) {
                          auto& dp = node.parents[0]->ensure_grad();
                          for (std::size_t i = 0; i < dp.size(); ++i) dp[i] += node.grad[i];
                        });
}

/// Mean over rows of -log softmax(logits_i)[labels_i]. logits is [B x C].
template <class T>
Tensor<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const std::size_t> labels) {
  detail::require_matrix(logits, "softmax_cross_entropy", "logits");
  const std::size_t B = logits.rows(), C = logits.cols();
  if (labels.size() != B) throw ShapeError("softmax_cross_entropy: label count != batch rows");
  std::vector<T> probs(B * C);
  std::vector<std::size_t> lab(labels.begin(), labels.end());
  double loss = 0;
  auto lv = logits.data();
  for (std::size_t i = 0; i < B; ++i) {
    if (lab[i] >= C) {
      throw InvalidArgument("label " + std::to_string(lab[i]) + " out of range for " + std::to_string(C) + " classes");
    }
    const T* row = lv.data() + i * C;
    const T mx = *std::max_element(row, row + C);
    double z = 0;
    for (std::size_t c = 0; c < C; ++c) z += std::exp(static_cast<double>(row[c] - mx));
    const double logz = std::log(z);
    for (std::size_t c = 0; c < C; ++c) {
      probs[i * C + c] = static_cast<T>(std::exp(static_cast<double>(row[c] - mx) - logz));
    }
    loss += -(static_cast<double>(row[lab[i]] - mx) - logz);
  }
  loss /= static_cast<double>(B);
  return make_result<T>({}, {static_cast<T>(loss)}, {logits},
                        [probs = std::move(probs), lab = std::move(lab), B, C](Node<T>& node) {
                          auto& dl = node.parents[0]->ensure_grad();
                          const T g = node.grad[0] / static_cast<T>(B);
                          for (std::size_t i = 0; i < B; ++i) {
                            for (std::size_t c = 0; c < C; ++c) {
                              T p = probs[i * C + c] - (c == lab[i] ? T(1) : T(0));
                              dl[i * C + c] += g * p;
                            }
                          }
                        });
}

/// Single-example form: logits is a vector [C].
template <class T>
Tensor<T> softmax_cross_entropy(const Tensor<T>& logits, std::size_t label) {
  if (logits.rank() != 1) {
    throw ShapeError("softmax_cross_entropy: expected logits vector, got " + shape_str(logits.shape()));
  }
  const std::size_t C = logits.numel();
  auto as_row = make_result<T>({1, C}, std::vector<T>(logits.data().begin(), logits.data().end()), {logits},
                               [](Node<T>& node) {
                                 auto& d = node.parents[0]->ensure_grad();
                                 for (std::size_t i = 0; i < d.size(); ++i) d[i] += node.grad[i];
                               });
  const std::size_t lab[1] = {label};
  return softmax_cross_entropy(as_row, std::span<const std::size_t>(lab, 1));
}

template <class T>
Tensor<T> sum(const Tensor<T>& x) {
  T s = 0;
  for (T v : x.data()) s += v;
  return make_result<T>({}, {s}, {x}, [](Node<T>& node) {
    auto& dx = node.parents[0]->ensure_grad();
    for (auto& v : dx) v += node.grad[0];
  });
}

/// sum_i x_i w_i for a constant weight vector; a random w turns backward()
/// into a vector-Jacobian product probe.
template <class T>
Tensor<T> dot_const(const Tensor<T>& x, std::vector<T> w) {
  if (w.size() != x.numel()) throw ShapeError("dot_const: weight length != " + std::to_string(x.numel()));
  T s = 0;
  auto xv = x.data();
  for (std::size_t i = 0; i < w.size(); ++i) s += xv[i] * w[i];
  return make_result<T>({}, {s}, {x}, [w = std::move(w)](Node<T>& node) {
    auto& dx = node.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < w.size(); ++i) dx[i] += node.grad[0] * w[i];
  });
}

/// Row-wise argmax with ties going to the lowest index.
template <class T>
std::vector<std::size_t> argmax_rows(const Tensor<T>& logits) {
  const std::size_t B = logits.rows(), C = logits.cols();
  std::vector<std::size_t> out(B);
  auto v = logits.data();
  for (std::size_t i = 0; i < B; ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < C; ++c) {
      if (v[i * C + c] > v[i * C + best]) best = c;
    }
    out[i] = best;
  }
  return out;
}

}  // namespace feddense::nn
