// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#pragma once

#include <memory>

#include "lidarsynth/tensor.hpp"

namespace lidarsynth::detail {

using NodePtr = std::shared_ptr<Node>;

/// Gradient buffer of an input, or nullptr if it does not take gradients.
inline float* grad_of(const NodePtr& n) {
  return n && n->requires_grad ? n->grad_buffer().data() : nullptr;
}

}  // namespace lidarsynth::detail
