#pragma once

// Two-channel graph classifier. The structural channel is a chain of GCN
// layers over structural vectors; the feature channel is a chain of GIN
// layers. In the dual-dense (ddc) variant each feature layer consumes the
// concatenation of every earlier feature map of both channels, and the
// readout pools all hidden maps of both channels.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "feddense/error.hpp"
#include "feddense/graph.hpp"
#include "feddense/matrix.hpp"
#include "feddense/nn/ops.hpp"
#include "feddense/nn/parameters.hpp"
#include "feddense/rng.hpp"

namespace feddense {

enum class ModelVariant { ddc, decoupled, single };

inline const char* to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::ddc: return "ddc";
    case ModelVariant::decoupled: return "decoupled";
    case ModelVariant::single: return "single";
  }
  return "?";
}

inline ModelVariant parse_model_variant(const std::string& s) {
  if (s == "ddc") return ModelVariant::ddc;
  if (s == "decoupled") return ModelVariant::decoupled;
  if (s == "single") return ModelVariant::single;
  throw InvalidArgument("unknown model variant '" + s + "'");
}

struct ModelConfig {
  ModelVariant variant = ModelVariant::ddc;
  std::size_t num_layers = 3;
  /// Output width r of every layer (k for the baselines).
  std::size_t hidden = 16;
  std::size_t feature_dim = 1;
  std::size_t struct_dim = 32;
  std::size_t num_classes = 2;
  double dropout = 0.5;
  double gin_epsilon = 0.0;
  /// Stop gradients of the structural maps fed into feature layers.
  bool detach_cross_channel = false;

  bool has_struct_channel() const noexcept { return variant != ModelVariant::single; }

  /// Width of the pooled graph embedding.
  std::size_t embedding_width() const noexcept {
    switch (variant) {
      case ModelVariant::ddc: return 2 * num_layers * hidden;
      case ModelVariant::decoupled: return 2 * hidden;
      case ModelVariant::single: return hidden;
    }
    return 0;
  }

  /// Input width of feature layer l (1-based).
  std::size_t feature_layer_input(std::size_t l) const noexcept {
    switch (variant) {
      case ModelVariant::ddc: return 2 * l * hidden;
      case ModelVariant::decoupled: return l == 1 ? 2 * hidden : hidden;
      case ModelVariant::single: return hidden;
    }
    return 0;
  }

  void validate() const {
    if (num_layers < 1) throw InvalidArgument("num_layers must be >= 1");
    if (hidden < 1) throw InvalidArgument("hidden width must be >= 1");
    if (feature_dim < 1) throw InvalidArgument("feature_dim must be >= 1");
    if (has_struct_channel() && struct_dim < 1) throw InvalidArgument("struct_dim must be >= 1");
    if (num_classes < 1) throw InvalidArgument("num_classes must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument("dropout must be in [0,1)");
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ParamSpec {
  std::string name;
  nn::Shape shape;
  nn::ParamGroup group;
  bool is_bias;
};

/// Declaration order: feature_init, struct_init, feature_layers.1..L,
/// struct_layers.1..L, classifier; each as weight then bias.
inline std::vector<ParamSpec> parameter_layout(const ModelConfig& cfg) {
  cfg.validate();
  std::vector<ParamSpec> out;
  auto add_linear = [&](const std::string& name, std::size_t a, std::size_t b, nn::ParamGroup g) {
    out.push_back({name + ".weight", {a, b}, g, false});
    out.push_back({name + ".bias", {b}, g, true});
  };
  using nn::ParamGroup;
  const std::size_t r = cfg.hidden, L = cfg.num_layers;
  add_linear("feature_init", cfg.feature_dim, r, ParamGroup::feature);
  if (cfg.has_struct_channel()) add_linear("struct_init", cfg.struct_dim, r, ParamGroup::structural);
  for (std::size_t l = 1; l <= L; ++l) {
    add_linear("feature_layers." + std::to_string(l), cfg.feature_layer_input(l), r, ParamGroup::feature);
  }
  if (cfg.has_struct_channel()) {
    for (std::size_t l = 1; l <= L; ++l) {
      add_linear("struct_layers." + std::to_string(l), r, r, ParamGroup::structural);
    }
  }
  add_linear("classifier", cfg.embedding_width(), cfg.num_classes, ParamGroup::feature);
  return out;
}

namespace model_detail {
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}
}  // namespace model_detail

/// Glorot-uniform weights and zero biases. Each tensor draws from its own
/// stream keyed by (seed, name), so tensors of equal name and shape agree
/// across configs that differ elsewhere (e.g. in feature_dim).
template <class T = float>
nn::ParameterSet<T> init_params(const ModelConfig& cfg, std::uint64_t seed) {
  nn::ParameterSet<T> params;
  for (const auto& spec : parameter_layout(cfg)) {
    nn::ParamTensor<T> t{spec.name, spec.shape, std::vector<T>(nn::numel(spec.shape), T(0)), spec.group, spec.is_bias};
    if (!spec.is_bias) {
      const double fan_in = static_cast<double>(spec.shape[0]), fan_out = static_cast<double>(spec.shape[1]);
      const double limit = std::sqrt(6.0 / (fan_in + fan_out));
      Rng rng = make_rng({seed, model_detail::fnv1a(spec.name)});
      for (auto& v : t.values) v = static_cast<T>((2.0 * uniform01(rng) - 1.0) * limit);
    }
    params.tensors.push_back(std::move(t));
  }
  return params;
}

/// The structural channel's tensors: struct_init and struct_layers.1..L.
template <class T>
nn::ParamSelection structural_subset(const nn::ParameterSet<T>& params, const ModelConfig& cfg) {
  if (!cfg.has_struct_channel()) throw UnsupportedVariant("single-channel model has no structural parameters");
  return nn::select_group(params, nn::ParamGroup::structural);
}

/// Several graphs packed as one disjoint union, with per-graph node offsets.
struct GraphBatch {
  Graph graph;
  Matrix struct_vectors;
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
};

/// `structs` may be empty for single-channel models.
inline GraphBatch make_batch(std::span<const Graph* const> graphs, std::span<const Matrix* const> structs) {
  if (graphs.empty()) throw InvalidArgument("empty batch");
  if (!structs.empty() && structs.size() != graphs.size()) throw ShapeError("make_batch: struct/graph count mismatch");
  GraphBatch b;
  b.graph = disjoint_union(graphs);
  b.offsets.push_back(0);
  for (const Graph* g : graphs) {
    b.offsets.push_back(b.offsets.back() + g->num_nodes());
    b.labels.push_back(g->label());
  }
  if (!structs.empty()) {
    const std::size_t w = structs.front()->cols;
    b.struct_vectors = Matrix(b.graph.num_nodes(), w);
    std::size_t row = 0;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      if (structs[i]->rows != graphs[i]->num_nodes() || structs[i]->cols != w) {
        throw ShapeError("make_batch: structural matrix " + std::to_string(i) + " has wrong shape");
      }
      std::copy(structs[i]->data.begin(), structs[i]->data.end(), b.struct_vectors.data.begin() + static_cast<std::ptrdiff_t>(row * w));
      row += graphs[i]->num_nodes();
    }
  }
  return b;
}

inline GraphBatch make_batch(const Graph& g, const Matrix* s) {
  const Graph* gs[1] = {&g};
  const Matrix* ss[1] = {s};
  return make_batch(std::span<const Graph* const>(gs, 1), s ? std::span<const Matrix* const>(ss, 1) : std::span<const Matrix* const>());
}

enum class Mode { train, eval };

/// Parameters bound to autodiff leaves for one pass.
template <class T>
struct BoundParams {
  const nn::ParameterSet<T>* set = nullptr;
  std::vector<nn::Tensor<T>> leaves;

  const nn::Tensor<T>& get(const std::string& name) const {
    auto i = set->index_of(name);
    if (i == leaves.size()) throw ShapeError("missing parameter '" + name + "'");
    return leaves[i];
  }
  nn::Gradients<T> grads() const { return nn::collect_grads(leaves); }
};

template <class T>
BoundParams<T> bind(const nn::ParameterSet<T>& params, bool requires_grad) {
  return {&params, nn::make_leaves(params, requires_grad)};
}

template <class T>
struct ForwardTrace {
  std::vector<nn::Tensor<T>> x_maps;         // x^(0..L)
  std::vector<nn::Tensor<T>> s_maps;         // s^(0..L); empty for single
  std::vector<nn::Tensor<T>> concat_inputs;  // c^(1..L) = [alpha | beta] (ddc)
  nn::Tensor<T> graph_embedding;             // [B x embedding_width]
  nn::Tensor<T> logits;                      // [B x num_classes]
};

namespace model_detail {
template <class T>
void check_input(const nn::Tensor<T>& in, const nn::Tensor<T>& W, const char* channel, std::size_t layer) {
  if (in.cols() != W.shape()[0]) {
    throw ShapeError(std::string(channel) + " layer " + std::to_string(layer) + ": input width " +
                     std::to_string(in.cols()) + " but weight " + nn::shape_str(W.shape()));
  }
}
}  // namespace model_detail

/// Forward pass over a (possibly batched) graph. x is [n x feature_dim], s is
/// [n x struct_dim] (ignored for single), offsets delimit graphs. The graph
/// must outlive any backward pass through the returned tensors.
template <class T>
ForwardTrace<T> forward(const Graph& g, const nn::Tensor<T>& x, const nn::Tensor<T>& s,
                        std::span<const std::size_t> offsets, const BoundParams<T>& p, const ModelConfig& cfg,
                        Mode mode, Rng& rng) {
  using nn::Tensor;
  const bool training = mode == Mode::train;
  const double drop = cfg.dropout;
  const T eps = static_cast<T>(cfg.gin_epsilon);
  const std::size_t L = cfg.num_layers;
  auto H = [&](const Tensor<T>& t) { return nn::relu_dropout(t, drop, training, rng); };
  auto feat_w = [&](std::size_t l) { return "feature_layers." + std::to_string(l); };
  auto struct_w = [&](std::size_t l) { return "struct_layers." + std::to_string(l); };

  if (x.cols() != cfg.feature_dim) {
    throw ShapeError("feature input width " + std::to_string(x.cols()) + " != feature_dim " + std::to_string(cfg.feature_dim));
  }
  ForwardTrace<T> tr;
  tr.x_maps.push_back(nn::linear(x, p.get("feature_init.weight"), p.get("feature_init.bias")));
  if (cfg.has_struct_channel()) {
    if (!s.defined() || s.cols() != cfg.struct_dim) {
      throw ShapeError("structural input width " + std::to_string(s.defined() ? s.cols() : 0) + " != struct_dim " +
                       std::to_string(cfg.struct_dim));
    }
    tr.s_maps.push_back(nn::linear(s, p.get("struct_init.weight"), p.get("struct_init.bias")));
  }

  for (std::size_t l = 1; l <= L; ++l) {
    const auto& Wf = p.get(feat_w(l) + ".weight");
    const auto& bf = p.get(feat_w(l) + ".bias");
    Tensor<T> in;
    switch (cfg.variant) {
      case ModelVariant::ddc: {
        auto alpha = H(nn::concat_cols(tr.x_maps));
        std::vector<Tensor<T>> sblock = tr.s_maps;
        if (cfg.detach_cross_channel) {
          for (auto& t : sblock) t = t.detach();
        }
        auto beta = H(nn::concat_cols(sblock));
        in = nn::concat_cols<T>({alpha, beta});
        tr.concat_inputs.push_back(in);
        break;
      }
      case ModelVariant::decoupled:
        in = l == 1 ? H(nn::concat_cols<T>({tr.x_maps[0], tr.s_maps[0]})) : H(tr.x_maps.back());
        break;
      case ModelVariant::single:
        in = H(tr.x_maps.back());
        break;
    }
    model_detail::check_input(in, Wf, "feature", l);
    auto x_next = nn::gin_conv(g, in, Wf, bf, eps);
    if (cfg.has_struct_channel()) {
      const auto& Ws = p.get(struct_w(l) + ".weight");
      auto s_in = H(tr.s_maps.back());
      model_detail::check_input(s_in, Ws, "structural", l);
      tr.s_maps.push_back(nn::gcn_conv(g, s_in, Ws, p.get(struct_w(l) + ".bias")));
    }
    tr.x_maps.push_back(std::move(x_next));
  }

  std::vector<Tensor<T>> readout;
  switch (cfg.variant) {
    case ModelVariant::ddc:
      readout.insert(readout.end(), tr.x_maps.begin() + 1, tr.x_maps.end());
      readout.insert(readout.end(), tr.s_maps.begin() + 1, tr.s_maps.end());
      break;
    case ModelVariant::decoupled:
      readout = {tr.x_maps.back(), tr.s_maps.back()};
      break;
    case ModelVariant::single:
      readout = {tr.x_maps.back()};
      break;
  }
  tr.graph_embedding = nn::segment_mean_pool(nn::concat_cols(readout), offsets);
  tr.logits = nn::linear(tr.graph_embedding, p.get("classifier.weight"), p.get("classifier.bias"));
  return tr;
}

template <class T>
nn::Tensor<T> to_tensor(std::span<const double> values, std::size_t rows, std::size_t cols) {
  return nn::Tensor<T>::leaf({rows, cols}, std::vector<T>(values.begin(), values.end()));
}

template <class T>
ForwardTrace<T> forward(const GraphBatch& batch, const BoundParams<T>& p, const ModelConfig& cfg, Mode mode, Rng& rng) {
  const Graph& g = batch.graph;
  auto x = to_tensor<T>(g.features(), g.num_nodes(), g.feature_dim());
  nn::Tensor<T> s;
  if (cfg.has_struct_channel()) {
    s = to_tensor<T>(batch.struct_vectors.data, batch.struct_vectors.rows, batch.struct_vectors.cols);
  }
  return forward(g, x, s, batch.offsets, p, cfg, mode, rng);
}

template <class T>
struct BatchResult {
  double loss = 0;  // mean cross-entropy over the batch
  std::size_t correct = 0;
  nn::Gradients<T> grads;  // empty unless requested
};

template <class T>
BatchResult<T> batch_loss(const GraphBatch& batch, const nn::ParameterSet<T>& params, const ModelConfig& cfg,
                          Mode mode, Rng& rng, bool with_grads) {
  auto bound = bind(params, with_grads);
  auto tr = forward(batch, bound, cfg, mode, rng);
  auto loss = nn::softmax_cross_entropy(tr.logits, std::span<const std::size_t>(batch.labels));
  BatchResult<T> out;
  out.loss = static_cast<double>(loss.item());
  auto pred = nn::argmax_rows(tr.logits);
  for (std::size_t i = 0; i < pred.size(); ++i) out.correct += pred[i] == batch.labels[i];
  if (with_grads) {
    loss.backward();
    out.grads = bound.grads();
  }
  return out;
}

}  // namespace feddense
