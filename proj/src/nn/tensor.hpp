// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "common/error.hpp"

namespace gewild::nn {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

template <typename T>
struct TensorNode {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until first touched by backward
  bool requires_grad = false;

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), T(0));
  }
};

/// Shared handle onto a row-major buffer. Copies alias the same storage, which
/// is what lets the tape route gradients back to parameters.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;
  using Node = TensorNode<T>;

  BasicTensor() = default;

  BasicTensor(Shape shape, std::vector<T> data, bool requires_grad = false)
      : node_(std::make_shared<Node>()) {
    for (std::size_t d : shape) {
      if (d == 0) fail(ErrorKind::Dimension, "tensor dims must be positive, got ", shape_str(shape));
    }
    if (nn::numel(shape) != data.size()) {
      fail(ErrorKind::Dimension, "tensor shape ", shape_str(shape), " needs ", nn::numel(shape),
           " values, got ", data.size());
    }
    node_->shape = std::move(shape);
    node_->data = std::move(data);
    node_->requires_grad = requires_grad;
  }

  static BasicTensor zeros(Shape shape, bool requires_grad = false) {
    const std::size_t n = nn::numel(shape);
    return BasicTensor(std::move(shape), std::vector<T>(n, T(0)), requires_grad);
  }

  static BasicTensor full(Shape shape, T value, bool requires_grad = false) {
    const std::size_t n = nn::numel(shape);
    return BasicTensor(std::move(shape), std::vector<T>(n, value), requires_grad);
  }

  static BasicTensor scalar(T value) { return BasicTensor({1}, {value}); }

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->data.size(); }

  /// Negative indices count from the back.
  std::size_t dim(int i) const {
    const int r = static_cast<int>(rank());
    const int idx = i < 0 ? r + i : i;
    if (idx < 0 || idx >= r) fail(ErrorKind::Dimension, "dim ", i, " out of range for ", shape_str(shape()));
    return node_->shape[static_cast<std::size_t>(idx)];
  }

  std::span<T> data() { return node_->data; }
  std::span<const T> data() const { return node_->data; }
  std::vector<T>& storage() { return node_->data; }
  const std::vector<T>& storage() const { return node_->data; }

  bool has_grad() const { return node_->grad.size() == node_->data.size(); }
  std::span<T> grad() { return node_->grad; }
  std::span<const T> grad() const { return node_->grad; }
  void zero_grad() { node_->grad.clear(); }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool v) { node_->requires_grad = v; }

  T item() const {
    if (numel() != 1) fail(ErrorKind::Dimension, "item() on tensor of shape ", shape_str(shape()));
    return node_->data[0];
  }

  T operator[](std::size_t i) const { return node_->data[i]; }

  /// Deep copy without gradient history.
  BasicTensor clone() const { return BasicTensor(shape(), node_->data); }

  const std::shared_ptr<Node>& node() const { return node_; }
  bool same_storage(const BasicTensor& other) const { return node_ == other.node_; }

 private:
  std::shared_ptr<Node> node_;
};

using Tensor = BasicTensor<float>;

/// Ordered record of differentiable operations. Entries are appended in
/// execution order, so inputs always precede their consumers and a reverse
/// sweep visits every node after all of its consumers.
template <typename T>
class Tape {
 public:
  using NodePtr = std::shared_ptr<TensorNode<T>>;

  struct Entry {
    const char* op;
    std::vector<NodePtr> inputs;
    NodePtr output;
    std::function<void()> backward;
  };

  void record(const char* op, std::vector<NodePtr> inputs, NodePtr output,
              std::function<void()> backward) {
    entries_.push_back({op, std::move(inputs), std::move(output), std::move(backward)});
  }

  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  void clear() { entries_.clear(); }

  /// Seeds d(root)/d(root) = 1 and propagates in reverse recording order.
  void backward(const BasicTensor<T>& root) {
    if (root.numel() != 1) {
      fail(ErrorKind::Dimension, "backward needs a scalar root, got ", shape_str(root.shape()));
    }
    for (auto& e : entries_) {
      for (auto& in : e.inputs) {
        if (in->requires_grad) in->ensure_grad();
      }
      e.output->ensure_grad();
    }
    auto& root_node = *root.node();
    root_node.ensure_grad();
    root_node.grad[0] += T(1);
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) it->backward();
  }

 private:
  std::vector<Entry> entries_;
};

namespace detail {
template <typename T>
Tape<T>*& active_tape() {
  thread_local Tape<T>* tape = nullptr;
  return tape;
}
}  // namespace detail

/// Routes recording on this thread to `tape` for the scope's lifetime.
/// Without an active scope operations run forward-only.
template <typename T>
class GradScope {
 public:
  explicit GradScope(Tape<T>& tape) : previous_(detail::active_tape<T>()) {
    detail::active_tape<T>() = &tape;
  }
  ~GradScope() { detail::active_tape<T>() = previous_; }
  GradScope(const GradScope&) = delete;
  GradScope& operator=(const GradScope&) = delete;

 private:
  Tape<T>* previous_;
};

}  // namespace gewild::nn
