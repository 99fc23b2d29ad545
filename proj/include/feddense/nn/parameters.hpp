#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "feddense/error.hpp"
#include "feddense/nn/tensor.hpp"

namespace feddense::nn {

/// Which channel a tensor belongs to. Structural tensors are the unit of
/// selective sharing; everything else (including the classifier) is feature side.
enum class ParamGroup { feature, structural };

template <class T>
struct ParamTensor {
  std::string name;
  Shape shape;
  std::vector<T> values;
  ParamGroup group = ParamGroup::feature;
  bool is_bias = false;

  std::size_t numel() const noexcept { return values.size(); }
  friend bool operator==(const ParamTensor&, const ParamTensor&) = default;
};

/// Ordered collection of named tensors. Order is declaration order and is
/// part of the checkpoint and payload formats.
template <class T>
struct ParameterSet {
  std::vector<ParamTensor<T>> tensors;

  std::size_t size() const noexcept { return tensors.size(); }

  std::size_t count() const noexcept {
    std::size_t c = 0;
    for (const auto& t : tensors) c += t.numel();
    return c;
  }

  std::size_t count(ParamGroup g) const noexcept {
    std::size_t c = 0;
    for (const auto& t : tensors) {
      if (t.group == g) c += t.numel();
    }
    return c;
  }

  /// Index of `name`, or size() if absent.
  std::size_t index_of(const std::string& name) const noexcept {
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      if (tensors[i].name == name) return i;
    }
    return tensors.size();
  }

  bool contains(const std::string& name) const noexcept { return index_of(name) < tensors.size(); }

  const ParamTensor<T>& at(const std::string& name) const {
    auto i = index_of(name);
    if (i == tensors.size()) throw ShapeError("no parameter named '" + name + "'");
    return tensors[i];
  }
  ParamTensor<T>& at(const std::string& name) {
    auto i = index_of(name);
    if (i == tensors.size()) throw ShapeError("no parameter named '" + name + "'");
    return tensors[i];
  }

  template <class U>
  ParameterSet<U> cast() const {
    ParameterSet<U> out;
    for (const auto& t : tensors) {
      out.tensors.push_back({t.name, t.shape, std::vector<U>(t.values.begin(), t.values.end()), t.group, t.is_bias});
    }
    return out;
  }

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;
};

/// Per-tensor gradients aligned with a ParameterSet.
template <class T>
using Gradients = std::vector<std::vector<T>>;

/// Subset of tensors of a ParameterSet, by index.
struct ParamSelection {
  std::vector<std::size_t> indices;

  bool contains(std::size_t i) const {
    return std::find(indices.begin(), indices.end(), i) != indices.end();
  }
  friend bool operator==(const ParamSelection&, const ParamSelection&) = default;
};

template <class T>
ParamSelection select_group(const ParameterSet<T>& params, ParamGroup g) {
  ParamSelection sel;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params.tensors[i].group == g) sel.indices.push_back(i);
  }
  return sel;
}

template <class T>
ParamSelection select_all(const ParameterSet<T>& params) {
  ParamSelection sel;
  for (std::size_t i = 0; i < params.size(); ++i) sel.indices.push_back(i);
  return sel;
}

template <class T>
ParamSelection complement(const ParameterSet<T>& params, const ParamSelection& sel) {
  ParamSelection out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!sel.contains(i)) out.indices.push_back(i);
  }
  return out;
}

template <class T>
std::size_t count(const ParameterSet<T>& params, const ParamSelection& sel) {
  std::size_t c = 0;
  for (auto i : sel.indices) c += params.tensors.at(i).numel();
  return c;
}

/// Copy of the selected tensors as a standalone set.
template <class T>
ParameterSet<T> extract(const ParameterSet<T>& params, const ParamSelection& sel) {
  ParameterSet<T> out;
  for (auto i : sel.indices) out.tensors.push_back(params.tensors.at(i));
  return out;
}

/// Overwrites tensors of `params` with same-named tensors of `src`.
template <class T>
void overwrite(ParameterSet<T>& params, const ParameterSet<T>& src) {
  for (const auto& t : src.tensors) {
    auto& dst = params.at(t.name);
    if (dst.shape != t.shape) {
      throw ShapeError("overwrite '" + t.name + "': " + shape_str(dst.shape) + " vs " + shape_str(t.shape));
    }
    dst.values = t.values;
  }
}

/// Leaf tensors mirroring a ParameterSet, for one forward/backward pass.
template <class T>
std::vector<Tensor<T>> make_leaves(const ParameterSet<T>& params, bool requires_grad) {
  std::vector<Tensor<T>> leaves;
  leaves.reserve(params.size());
  for (const auto& t : params.tensors) leaves.push_back(Tensor<T>::leaf(t.shape, t.values, requires_grad));
  return leaves;
}

template <class T>
Gradients<T> collect_grads(const std::vector<Tensor<T>>& leaves) {
  Gradients<T> g;
  g.reserve(leaves.size());
  for (const auto& l : leaves) g.push_back(l.grad());
  return g;
}

}  // namespace feddense::nn
