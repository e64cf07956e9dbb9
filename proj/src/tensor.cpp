// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#include "lidarsynth/tensor.hpp"

#include <algorithm>
#include <unordered_set>

#include "lidarsynth/error.hpp"

namespace lidarsynth {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::vector<float>& detail::Node::grad_buffer() {
  if (grad.empty()) grad.assign(value.size(), 0.0f);
  return grad;
}

namespace {

void check_shape(const Shape& shape) {
  for (auto d : shape) {
    if (d == 0) throw InvalidArgument("tensor extents must be positive: " + shape_string(shape));
  }
}

}  // namespace

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0f, requires_grad); }

Tensor Tensor::full(Shape shape, float value, bool requires_grad) {
  check_shape(shape);
  const auto n = shape_numel(shape);
  return from(std::move(shape), std::vector<float>(n, value), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<float> values, bool requires_grad) {
  check_shape(shape);
  if (values.size() != shape_numel(shape)) {
    throw InvalidArgument("value count " + std::to_string(values.size()) + " does not match shape " +
                          shape_string(shape));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(float value, bool requires_grad) { return from({1}, {value}, requires_grad); }

detail::Node& Tensor::checked() const {
  if (!node_) throw InvalidArgument("use of undefined tensor");
  return *node_;
}

const Shape& Tensor::shape() const { return checked().shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size()) throw InvalidArgument("axis out of range for shape " + shape_string(s));
  return s[axis];
}

std::size_t Tensor::numel() const { return checked().value.size(); }
std::span<const float> Tensor::values() const { return checked().value; }
std::span<float> Tensor::mutable_values() { return checked().value; }

float Tensor::item() const {
  if (numel() != 1) throw InvalidArgument("item() needs a single-element tensor");
  return checked().value[0];
}

bool Tensor::requires_grad() const { return checked().requires_grad; }
void Tensor::set_requires_grad(bool flag) { checked().requires_grad = flag; }
bool Tensor::has_grad() const { return !checked().grad.empty(); }
std::span<const float> Tensor::grad() const { return checked().grad; }

void Tensor::zero_grad() { checked().grad.clear(); }

Tensor Tensor::detach() const {
  const auto& n = checked();
  return from(n.shape, n.value, false);
}

Tensor Tensor::make_result(Shape shape, std::vector<float> values, std::vector<Tensor> inputs,
                           std::function<void(detail::Node&)> backward) {
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  const bool track = std::any_of(inputs.begin(), inputs.end(),
                                 [](const Tensor& t) { return t.defined() && t.requires_grad(); });
  if (track) {
    node->requires_grad = true;
    for (auto& t : inputs) {
      if (t.defined()) node->inputs.push_back(t.node_);
    }
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

void Tensor::backward() const {
  auto& root = checked();
  if (root.value.size() != 1) throw InvalidArgument("backward() needs a scalar output");
  if (!root.requires_grad) throw InvalidArgument("backward() on a tensor that does not require grad");

  // Iterative post-order DFS gives a topological order (inputs before users).
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> visited;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      detail::Node* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root.grad_buffer()[0] += 1.0f;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (node->backward && !node->grad.empty()) node->backward(*node);
  }
}

}  // namespace lidarsynth
