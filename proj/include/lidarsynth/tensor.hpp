// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lidarsynth {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<float> value;
  std::vector<float> grad;  // empty until something flows into it
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into the inputs' grads.
  std::function<void(Node&)> backward;

  std::vector<float>& grad_buffer();
};

}  // namespace detail

/// Dense float32 n-d array with reverse-mode differentiation.
///
/// A Tensor is a cheap shared handle. Ops produce new nodes that remember
/// their inputs when any input requires grad; backward() on a scalar walks
/// the recorded graph and sums gradients into every reachable node.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, float value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<float> values, bool requires_grad = false);
  static Tensor scalar(float value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const float> values() const;
  /// Direct write access; only meaningful on leaves (parameters, inputs).
  std::span<float> mutable_values();
  float item() const;

  bool requires_grad() const;
  void set_requires_grad(bool flag);
  bool has_grad() const;
  /// Gradient accumulated so far; empty span when nothing flowed here.
  std::span<const float> grad() const;
  void zero_grad();

  /// Seeds d(self)/d(self) = 1 and propagates. Requires numel() == 1.
  void backward() const;

  /// Same values, no history, no grad.
  Tensor detach() const;

  /// Internal: wraps a computed value and its backward rule. The node
  /// records history only if some input requires grad.
  static Tensor make_result(Shape shape, std::vector<float> values, std::vector<Tensor> inputs,
                            std::function<void(detail::Node&)> backward);
  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  detail::Node& checked() const;

  std::shared_ptr<detail::Node> node_;
};

}  // namespace lidarsynth
