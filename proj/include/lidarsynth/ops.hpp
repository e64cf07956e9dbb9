// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "lidarsynth/tensor.hpp"

namespace lidarsynth {

enum class Mode { train, eval };

using Rng = std::mt19937_64;

/// y = x W + b over the last axis of x. x[..., I], W[I, O], b[O] (optional).
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias = {});

/// Elementwise sum; b may match x exactly or a trailing suffix of x's shape
/// (broadcast over the leading axes).
Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, float factor);
Tensor relu(const Tensor& x);

/// Numerically stable softmax along `axis`.
Tensor softmax(const Tensor& x, std::size_t axis);

/// Per-row normalization over the last axis, then gain * xhat + bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, float eps = 1e-5f);

/// Inverted dropout: training mode zeroes with probability p and scales the
/// survivors by 1 / (1 - p); eval mode (or p == 0) is the identity.
Tensor dropout(const Tensor& x, float p, Mode mode, Rng& rng);

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor reshape(const Tensor& x, Shape shape);
/// Drops `axis` by picking one index along it.
Tensor select(const Tensor& x, std::size_t axis, std::size_t index);
/// Stacks `count` copies of x along a new leading axis.
Tensor tile(const Tensor& x, std::size_t count);

Tensor sum(const Tensor& x);
/// sum_i x_i * w_i as a scalar; w is a constant.
Tensor weighted_sum(const Tensor& x, std::span<const float> weights);

struct AttentionParams {
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;  // [D, D] and [D]
};

/// Softmax attention probabilities captured from a forward pass,
/// laid out [batch, head, query, key].
struct AttentionProbs {
  std::size_t batch = 0;
  std::size_t heads = 0;
  std::size_t tokens = 0;
  std::vector<float> values;

  float at(std::size_t b, std::size_t h, std::size_t i, std::size_t j) const {
    return values[((b * heads + h) * tokens + i) * tokens + j];
  }
};

/// Per-head softmax(q k^T / sqrt(d_head)) v on q, k, v of shape [B, T, D].
Tensor scaled_dot_product_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t n_heads,
                                    AttentionProbs* probs = nullptr);

/// Q/K/V projections, per-head scaled dot-product attention, heads
/// concatenated, output projection. x is [T, D] or [B, T, D].
Tensor multi_head_self_attention(const Tensor& x, const AttentionParams& params, std::size_t n_heads,
                                 AttentionProbs* probs = nullptr);

/// Transposed 2-D convolution. x is [C_in, H, W] or [N, C_in, H, W],
/// kernels [C_in, C_out, k, k], bias [C_out] (optional).
/// Output extent (H - 1) * stride - 2 * padding + k.
Tensor conv_transpose2d(const Tensor& x, const Tensor& kernels, const Tensor& bias, std::size_t stride,
                        std::size_t padding);
std::size_t conv_transpose_extent(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t padding);

struct BatchNormOptions {
  float momentum = 0.1f;
  float eps = 1e-5f;
};

/// Per-channel batch normalization of x[N, C, H, W]. Training mode uses
/// batch statistics (N >= 2) and updates the running buffers in place;
/// eval mode normalizes with the running buffers.
Tensor batch_norm2d(const Tensor& x, const Tensor& gain, const Tensor& bias, Tensor& running_mean,
                    Tensor& running_var, Mode mode, BatchNormOptions options = {});

/// mean over all elements of w_row * (pred - target)^2, where the row is the
/// second-to-last axis. target is treated as a constant.
Tensor mmse_loss(const Tensor& pred, const Tensor& target, std::span<const float> row_weights);

}  // namespace lidarsynth
