#pragma once

// Dense row-major tensors (rank 0-2) with tape-based reverse-mode autodiff.
// Each op allocates a node holding its value and a closure that pushes the
// node's gradient into its parents. A tape is owned by whatever Tensors keep
// its nodes alive and must only be driven from one thread.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "feddense/error.hpp"

namespace feddense::nn {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << ']';
  return os.str();
}

// ---------------------------------------------------------------------------
// FLOP instrumentation. Counting is active only inside a FlopScope on the
// current thread; with no scope installed the primitives skip counting.

struct FlopCounter {
  std::uint64_t linear = 0;       // 2 * n * a * b per dense transform
  std::uint64_t aggregation = 0;  // 2 * |E| * a per neighborhood aggregation
  std::uint64_t elementwise = 0;  // one per element for activations and pooling

  std::uint64_t total() const noexcept { return linear + aggregation + elementwise; }

  FlopCounter& operator+=(const FlopCounter& o) noexcept {
    linear += o.linear;
    aggregation += o.aggregation;
    elementwise += o.elementwise;
    return *this;
  }
  friend bool operator==(const FlopCounter&, const FlopCounter&) = default;
};

namespace detail {
inline thread_local FlopCounter* active_counter = nullptr;
}

class FlopScope {
 public:
  explicit FlopScope(FlopCounter& c) : prev_(detail::active_counter) { detail::active_counter = &c; }
  ~FlopScope() { detail::active_counter = prev_; }
  FlopScope(const FlopScope&) = delete;
  FlopScope& operator=(const FlopScope&) = delete;

 private:
  FlopCounter* prev_;
};

inline FlopCounter* active_flop_counter() noexcept { return detail::active_counter; }

// ---------------------------------------------------------------------------

template <class T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;  // empty until a gradient reaches this node
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  std::vector<T>& ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), T(0));
    return grad;
  }
};

template <class T>
class Tensor {
 public:
  using NodePtr = std::shared_ptr<Node<T>>;

  Tensor() = default;
  explicit Tensor(NodePtr node) : node_(std::move(node)) {}

  static Tensor leaf(Shape shape, std::vector<T> values, bool requires_grad = false) {
    if (values.size() != nn::numel(shape)) {
      throw ShapeError("tensor of shape " + shape_str(shape) + " given " +
                       std::to_string(values.size()) + " values");
    }
    auto n = std::make_shared<Node<T>>();
    n->shape = std::move(shape);
    n->value = std::move(values);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
  }

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    auto count = nn::numel(shape);
    return leaf(std::move(shape), std::vector<T>(count, T(0)), requires_grad);
  }

  static Tensor scalar(T v, bool requires_grad = false) { return leaf({}, {v}, requires_grad); }

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->value.size(); }
  /// Row count of a matrix; 1 for vectors and scalars.
  std::size_t rows() const { return rank() == 2 ? node_->shape[0] : 1; }
  /// Column count of a matrix or vector length; 1 for scalars.
  std::size_t cols() const { return rank() == 0 ? 1 : node_->shape.back(); }

  std::span<const T> data() const { return node_->value; }
  std::span<T> mutable_data() { return node_->value; }
  T item() const {
    if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape()));
    return node_->value[0];
  }
  T at(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  /// Gradient after backward(); zeros if nothing flowed here.
  std::vector<T> grad() const {
    return node_->grad.empty() ? std::vector<T>(numel(), T(0)) : node_->grad;
  }
  void zero_grad() { node_->grad.clear(); }

  /// Same values, cut from the tape.
  Tensor detach() const { return leaf(shape(), node_->value, false); }

  /// Reverse sweep from a scalar output.
  void backward() const {
    if (numel() != 1) throw ShapeError("backward() requires a scalar, got " + shape_str(shape()));
    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> seen;
    // Iterative post-order DFS.
    std::vector<std::pair<Node<T>*, std::size_t>> stack{{node_.get(), 0}};
    seen.insert(node_.get());
    while (!stack.empty()) {
      auto& [n, next] = stack.back();
      if (next < n->parents.size()) {
        Node<T>* p = n->parents[next++].get();
        if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
      } else {
        order.push_back(n);
        stack.pop_back();
      }
    }
    node_->ensure_grad()[0] += T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      Node<T>* n = *it;
      if (n->backward && !n->grad.empty()) n->backward(*n);
    }
  }

  const NodePtr& node() const noexcept { return node_; }

 private:
  NodePtr node_;
};

/// Builds an op result. The backward closure is only attached when some
/// parent requires a gradient.
template <class T>
Tensor<T> make_result(Shape shape, std::vector<T> value, std::vector<Tensor<T>> parents,
                      std::function<void(Node<T>&)> backward) {
  auto n = std::make_shared<Node<T>>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  for (const auto& p : parents) n->requires_grad = n->requires_grad || p.requires_grad();
  if (n->requires_grad) {
    for (auto& p : parents) n->parents.push_back(p.node());
    n->backward = std::move(backward);
  }
  return Tensor<T>(std::move(n));
}

}  // namespace feddense::nn
