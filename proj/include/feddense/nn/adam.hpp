#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "feddense/error.hpp"
#include "feddense/nn/parameters.hpp"

namespace feddense::nn {

struct AdamOptions {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// L2 penalty added to the gradient of weight tensors (biases exempt).
  double weight_decay = 5e-4;

  friend bool operator==(const AdamOptions&, const AdamOptions&) = default;
};

template <class T>
struct AdamState {
  AdamOptions options;
  std::size_t step = 0;
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;

  AdamState() = default;
  explicit AdamState(AdamOptions opts) : options(opts) {}

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// One Adam update with bias-corrected moments. Weight decay is folded into
/// the gradient before the moment updates (Adam with L2).
template <class T>
void adam_step(ParameterSet<T>& params, const Gradients<T>& grads, AdamState<T>& state) {
  if (grads.size() != params.size()) {
    throw ShapeError("adam_step: " + std::to_string(grads.size()) + " gradients for " +
                     std::to_string(params.size()) + " parameters");
  }
  if (state.first_moment.empty()) {
    for (const auto& t : params.tensors) {
      state.first_moment.emplace_back(t.numel(), T(0));
      state.second_moment.emplace_back(t.numel(), T(0));
    }
  }
  if (state.first_moment.size() != params.size()) throw ShapeError("adam_step: optimizer state size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].size() != params.tensors[i].numel() || state.first_moment[i].size() != params.tensors[i].numel()) {
      throw ShapeError("adam_step: shape mismatch for '" + params.tensors[i].name + "'");
    }
  }
  const auto& o = state.options;
  ++state.step;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params.tensors[i];
    const double wd = p.is_bias ? 0.0 : o.weight_decay;
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (std::size_t k = 0; k < p.values.size(); ++k) {
      const double g = static_cast<double>(grads[i][k]) + wd * static_cast<double>(p.values[k]);
      const double mk = o.beta1 * static_cast<double>(m[k]) + (1.0 - o.beta1) * g;
      const double vk = o.beta2 * static_cast<double>(v[k]) + (1.0 - o.beta2) * g * g;
      m[k] = static_cast<T>(mk);
      v[k] = static_cast<T>(vk);
      const double update = o.lr * (mk / c1) / (std::sqrt(vk / c2) + o.eps);
      p.values[k] = static_cast<T>(static_cast<double>(p.values[k]) - update);
    }
  }
}

}  // namespace feddense::nn
