// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#include <algorithm>
#include <cmath>

#include "autograd_util.hpp"
#include "lidarsynth/error.hpp"
#include "lidarsynth/ops.hpp"

namespace lidarsynth {

using detail::grad_of;
using detail::Node;
using detail::NodePtr;

Tensor scaled_dot_product_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t n_heads,
                                    AttentionProbs* probs) {
  if (q.rank() != 3 || q.shape() != k.shape() || q.shape() != v.shape()) {
    throw InvalidArgument("attention: q, k, v must share a [B, T, D] shape");
  }
  const std::size_t B = q.dim(0);
  const std::size_t T = q.dim(1);
  const std::size_t D = q.dim(2);
  if (n_heads == 0 || D % n_heads != 0) {
    throw InvalidArgument("attention: model width " + std::to_string(D) + " not divisible by " +
                          std::to_string(n_heads) + " heads");
  }
  const std::size_t dh = D / n_heads;
  const float scale = 1.0f / std::sqrt(static_cast<float>(dh));
  const auto qv = q.values();
  const auto kv = k.values();
  const auto vv = v.values();

  std::vector<float> p(B * n_heads * T * T);
  std::vector<float> out(B * T * D, 0.0f);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t h = 0; h < n_heads; ++h) {
      float* ph = p.data() + (b * n_heads + h) * T * T;
      for (std::size_t i = 0; i < T; ++i) {
        const float* qi = qv.data() + (b * T + i) * D + h * dh;
        float* row = ph + i * T;
        float mx = -INFINITY;
        for (std::size_t j = 0; j < T; ++j) {
          const float* kj = kv.data() + (b * T + j) * D + h * dh;
          float s = 0.0f;
          for (std::size_t d = 0; d < dh; ++d) s += qi[d] * kj[d];
          row[j] = s * scale;
          mx = std::max(mx, row[j]);
        }
        double total = 0.0;
        for (std::size_t j = 0; j < T; ++j) {
          row[j] = std::exp(row[j] - mx);
          total += row[j];
        }
        const auto inv = static_cast<float>(1.0 / total);
        for (std::size_t j = 0; j < T; ++j) row[j] *= inv;
        float* oi = out.data() + (b * T + i) * D + h * dh;
        for (std::size_t j = 0; j < T; ++j) {
          const float* vj = vv.data() + (b * T + j) * D + h * dh;
          for (std::size_t d = 0; d < dh; ++d) oi[d] += row[j] * vj[d];
        }
      }
    }
  }
  if (probs) *probs = AttentionProbs{B, n_heads, T, p};

  NodePtr qn = q.node(), kn = k.node(), vn = v.node();
  return Tensor::make_result(q.shape(), std::move(out), {q, k, v}, [=, p = std::move(p)](Node& self) {
    float* dq = grad_of(qn);
    float* dk = grad_of(kn);
    float* dv = grad_of(vn);
    const float* dout = self.grad.data();
    const float* qd = qn->value.data();
    const float* kd = kn->value.data();
    const float* vd = vn->value.data();
    std::vector<float> dp(T);
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t h = 0; h < n_heads; ++h) {
        const float* ph = p.data() + (b * n_heads + h) * T * T;
        for (std::size_t i = 0; i < T; ++i) {
          const float* row = ph + i * T;
          const float* doi = dout + (b * T + i) * D + h * dh;
          double dot = 0.0;
          for (std::size_t j = 0; j < T; ++j) {
            const float* vj = vd + (b * T + j) * D + h * dh;
            float s = 0.0f;
            for (std::size_t d = 0; d < dh; ++d) s += doi[d] * vj[d];
            dp[j] = s;
            dot += static_cast<double>(s) * row[j];
            if (dv) {
              float* dvj = dv + (b * T + j) * D + h * dh;
              for (std::size_t d = 0; d < dh; ++d) dvj[d] += row[j] * doi[d];
            }
          }
          // dS = P * (dP - sum(dP * P)), then through the 1/sqrt(dh) scale.
          for (std::size_t j = 0; j < T; ++j) {
            const float ds = row[j] * (dp[j] - static_cast<float>(dot)) * scale;
            if (ds == 0.0f) continue;
            if (dq) {
              float* dqi = dq + (b * T + i) * D + h * dh;
              const float* kj = kd + (b * T + j) * D + h * dh;
              for (std::size_t d = 0; d < dh; ++d) dqi[d] += ds * kj[d];
            }
            if (dk) {
              float* dkj = dk + (b * T + j) * D + h * dh;
              const float* qi = qd + (b * T + i) * D + h * dh;
              for (std::size_t d = 0; d < dh; ++d) dkj[d] += ds * qi[d];
            }
          }
        }
      }
    }
  });
}

Tensor multi_head_self_attention(const Tensor& x, const AttentionParams& params, std::size_t n_heads,
                                 AttentionProbs* probs) {
  if (x.rank() != 2 && x.rank() != 3) throw InvalidArgument("attention input must be [T, D] or [B, T, D]");
  const std::size_t D = x.shape().back();
  if (n_heads == 0 || D % n_heads != 0) {
    throw InvalidArgument("attention: model width " + std::to_string(D) + " not divisible by " +
                          std::to_string(n_heads) + " heads");
  }
  const Tensor xb = x.rank() == 2 ? reshape(x, {1, x.dim(0), D}) : x;
  const Tensor q = linear(xb, params.wq, params.bq);
  const Tensor k = linear(xb, params.wk, params.bk);
  const Tensor v = linear(xb, params.wv, params.bv);
  const Tensor heads = scaled_dot_product_attention(q, k, v, n_heads, probs);
  const Tensor out = linear(heads, params.wo, params.bo);
  return x.rank() == 2 ? reshape(out, x.shape()) : out;
}

}  // namespace lidarsynth
