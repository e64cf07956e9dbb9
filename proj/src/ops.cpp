// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#include "lidarsynth/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "autograd_util.hpp"
#include "gemm.hpp"
#include "lidarsynth/error.hpp"

namespace lidarsynth {

using detail::grad_of;
using detail::Node;
using detail::NodePtr;

namespace {

bool is_suffix(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

struct AxisSplit {
  std::size_t outer = 1;
  std::size_t len = 1;
  std::size_t inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) throw InvalidArgument("axis out of range for shape " + shape_string(shape));
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.len = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

}  // namespace

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (weight.rank() != 2) throw InvalidArgument("linear: weight must be [in, out]");
  const std::size_t in = weight.dim(0);
  const std::size_t out = weight.dim(1);
  if (x.rank() < 1 || x.shape().back() != in) {
    throw InvalidArgument("linear: input " + shape_string(x.shape()) + " does not match weight " +
                          shape_string(weight.shape()));
  }
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != out)) {
    throw InvalidArgument("linear: bias must be [out]");
  }
  const std::size_t rows = x.numel() / in;
  Shape shape = x.shape();
  shape.back() = out;
  std::vector<float> y(rows * out, 0.0f);
  if (bias.defined()) {
    const auto b = bias.values();
    for (std::size_t r = 0; r < rows; ++r) std::copy(b.begin(), b.end(), y.begin() + static_cast<std::ptrdiff_t>(r * out));
  }
  detail::gemm(false, false, rows, out, in, 1.0f, x.values().data(), weight.values().data(), bias.defined() ? 1.0f : 0.0f,
               y.data());

  NodePtr xn = x.node(), wn = weight.node(), bn = bias.defined() ? bias.node() : nullptr;
  std::vector<Tensor> inputs{x, weight};
  if (bias.defined()) inputs.push_back(bias);
  return Tensor::make_result(std::move(shape), std::move(y), std::move(inputs), [=](Node& self) {
    const float* dy = self.grad.data();
    if (float* dx = grad_of(xn)) detail::gemm(false, true, rows, in, out, 1.0f, dy, wn->value.data(), 1.0f, dx);
    if (float* dw = grad_of(wn)) detail::gemm(true, false, in, out, rows, 1.0f, xn->value.data(), dy, 1.0f, dw);
    if (float* db = grad_of(bn)) {
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t o = 0; o < out; ++o) db[o] += dy[r * out + o];
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (!is_suffix(b.shape(), a.shape())) {
    throw InvalidArgument("add: " + shape_string(b.shape()) + " does not broadcast onto " + shape_string(a.shape()));
  }
  const std::size_t n = a.numel();
  const std::size_t m = b.numel();
  std::vector<float> y(a.values().begin(), a.values().end());
  const auto bv = b.values();
  for (std::size_t i = 0; i < n; ++i) y[i] += bv[i % m];
  NodePtr an = a.node(), bn = b.node();
  return Tensor::make_result(a.shape(), std::move(y), {a, b}, [=](Node& self) {
    if (float* da = grad_of(an))
      for (std::size_t i = 0; i < n; ++i) da[i] += self.grad[i];
    if (float* db = grad_of(bn))
      for (std::size_t i = 0; i < n; ++i) db[i % m] += self.grad[i];
  });
}

Tensor scale(const Tensor& x, float factor) {
  std::vector<float> y(x.values().begin(), x.values().end());
  for (auto& v : y) v *= factor;
  NodePtr xn = x.node();
  return Tensor::make_result(x.shape(), std::move(y), {x}, [=](Node& self) {
    if (float* dx = grad_of(xn))
      for (std::size_t i = 0; i < self.grad.size(); ++i) dx[i] += factor * self.grad[i];
  });
}

Tensor relu(const Tensor& x) {
  std::vector<float> y(x.values().begin(), x.values().end());
  for (auto& v : y) v = v > 0.0f ? v : 0.0f;
  NodePtr xn = x.node();
  return Tensor::make_result(x.shape(), std::move(y), {x}, [=](Node& self) {
    if (float* dx = grad_of(xn))
      for (std::size_t i = 0; i < self.grad.size(); ++i)
        if (xn->value[i] > 0.0f) dx[i] += self.grad[i];
  });
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  const auto s = split_at(x.shape(), axis);
  const auto xv = x.values();
  std::vector<float> y(xv.size());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.len * s.inner + in;
      float mx = -INFINITY;
      for (std::size_t j = 0; j < s.len; ++j) mx = std::max(mx, xv[base + j * s.inner]);
      double total = 0.0;
      for (std::size_t j = 0; j < s.len; ++j) {
        const float e = std::exp(xv[base + j * s.inner] - mx);
        y[base + j * s.inner] = e;
        total += e;
      }
      const auto inv = static_cast<float>(1.0 / total);
      for (std::size_t j = 0; j < s.len; ++j) y[base + j * s.inner] *= inv;
    }
  }
  NodePtr xn = x.node();
  return Tensor::make_result(x.shape(), y, {x}, [=](Node& self) {
    float* dx = grad_of(xn);
    if (!dx) return;
    const auto& yv = self.value;
    const auto& dy = self.grad;
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t in = 0; in < s.inner; ++in) {
        const std::size_t base = o * s.len * s.inner + in;
        double dot = 0.0;
        for (std::size_t j = 0; j < s.len; ++j) dot += dy[base + j * s.inner] * yv[base + j * s.inner];
        for (std::size_t j = 0; j < s.len; ++j) {
          const std::size_t idx = base + j * s.inner;
          dx[idx] += yv[idx] * (dy[idx] - static_cast<float>(dot));
        }
      }
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, float eps) {
  const std::size_t d = x.shape().back();
  if (gain.numel() != d || bias.numel() != d) throw InvalidArgument("layer_norm: gain/bias must match last axis");
  const std::size_t rows = x.numel() / d;
  const auto xv = x.values();
  const auto g = gain.values();
  const auto b = bias.values();
  std::vector<float> y(xv.size());
  std::vector<float> xhat(xv.size());
  std::vector<float> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const float* row = xv.data() + r * d;
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += row[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[r] = static_cast<float>(is);
    for (std::size_t j = 0; j < d; ++j) {
      const auto h = static_cast<float>((row[j] - mean) * is);
      xhat[r * d + j] = h;
      y[r * d + j] = g[j] * h + b[j];
    }
  }
  NodePtr xn = x.node(), gn = gain.node(), bn = bias.node();
  return Tensor::make_result(x.shape(), std::move(y), {x, gain, bias},
                             [=, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
    const auto& dy = self.grad;
    if (float* dg = grad_of(gn))
      for (std::size_t i = 0; i < dy.size(); ++i) dg[i % d] += dy[i] * xhat[i];
    if (float* db = grad_of(bn))
      for (std::size_t i = 0; i < dy.size(); ++i) db[i % d] += dy[i];
    float* dx = grad_of(xn);
    if (!dx) return;
    const auto& gv = gn->value;
    for (std::size_t r = 0; r < rows; ++r) {
      double mean_dh = 0.0;
      double mean_dh_h = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double dh = static_cast<double>(dy[r * d + j]) * gv[j];
        mean_dh += dh;
        mean_dh_h += dh * xhat[r * d + j];
      }
      mean_dh /= static_cast<double>(d);
      mean_dh_h /= static_cast<double>(d);
      for (std::size_t j = 0; j < d; ++j) {
        const double dh = static_cast<double>(dy[r * d + j]) * gv[j];
        dx[r * d + j] += static_cast<float>(inv_std[r] * (dh - mean_dh - xhat[r * d + j] * mean_dh_h));
      }
    }
  });
}

Tensor dropout(const Tensor& x, float p, Mode mode, Rng& rng) {
  if (!(p >= 0.0f && p < 1.0f)) throw InvalidArgument("dropout probability must be in [0, 1)");
  if (mode == Mode::eval || p == 0.0f) return x;
  const float keep_scale = 1.0f / (1.0f - p);
  const auto xv = x.values();
  std::vector<float> mask(xv.size());
  std::vector<float> y(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    // 53 random bits -> uniform double in [0, 1)
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    mask[i] = u < p ? 0.0f : keep_scale;
    y[i] = xv[i] * mask[i];
  }
  NodePtr xn = x.node();
  return Tensor::make_result(x.shape(), std::move(y), {x}, [=, mask = std::move(mask)](Node& self) {
    if (float* dx = grad_of(xn))
      for (std::size_t i = 0; i < mask.size(); ++i) dx[i] += mask[i] * self.grad[i];
  });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw InvalidArgument("concat needs at least one tensor");
  Shape shape = parts.front().shape();
  if (axis >= shape.size()) throw InvalidArgument("concat axis out of range");
  std::size_t total = 0;
  for (const auto& p : parts) {
    Shape s = p.shape();
    if (s.size() != shape.size()) throw InvalidArgument("concat rank mismatch");
    total += s[axis];
    s[axis] = shape[axis];
    if (s != shape) throw InvalidArgument("concat shapes differ off the concat axis");
  }
  shape[axis] = total;
  const auto whole = split_at(shape, axis);
  std::vector<float> y(shape_numel(shape));
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    offsets.push_back(offset);
    const std::size_t len = p.dim(axis);
    const auto pv = p.values();
    for (std::size_t o = 0; o < whole.outer; ++o) {
      std::copy_n(pv.begin() + static_cast<std::ptrdiff_t>(o * len * whole.inner), len * whole.inner,
                  y.begin() + static_cast<std::ptrdiff_t>((o * whole.len + offset) * whole.inner));
    }
    offset += len;
  }
  std::vector<NodePtr> nodes;
  std::vector<std::size_t> lens;
  for (const auto& p : parts) {
    nodes.push_back(p.node());
    lens.push_back(p.dim(axis));
  }
  return Tensor::make_result(shape, std::move(y), parts, [=](Node& self) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      float* dp = grad_of(nodes[i]);
      if (!dp) continue;
      for (std::size_t o = 0; o < whole.outer; ++o) {
        const float* src = self.grad.data() + (o * whole.len + offsets[i]) * whole.inner;
        float* dst = dp + o * lens[i] * whole.inner;
        for (std::size_t j = 0; j < lens[i] * whole.inner; ++j) dst[j] += src[j];
      }
    }
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw InvalidArgument("reshape: " + shape_string(x.shape()) + " -> " + shape_string(shape) + " changes size");
  }
  NodePtr xn = x.node();
  return Tensor::make_result(std::move(shape), std::vector<float>(x.values().begin(), x.values().end()), {x},
                             [=](Node& self) {
                               if (float* dx = grad_of(xn))
                                 for (std::size_t i = 0; i < self.grad.size(); ++i) dx[i] += self.grad[i];
                             });
}

Tensor select(const Tensor& x, std::size_t axis, std::size_t index) {
  const auto s = split_at(x.shape(), axis);
  if (index >= s.len) throw InvalidArgument("select index out of range");
  Shape shape = x.shape();
  shape.erase(shape.begin() + static_cast<std::ptrdiff_t>(axis));
  if (shape.empty()) shape = {1};
  const auto xv = x.values();
  std::vector<float> y(s.outer * s.inner);
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t in = 0; in < s.inner; ++in) y[o * s.inner + in] = xv[(o * s.len + index) * s.inner + in];
  NodePtr xn = x.node();
  return Tensor::make_result(std::move(shape), std::move(y), {x}, [=](Node& self) {
    if (float* dx = grad_of(xn))
      for (std::size_t o = 0; o < s.outer; ++o)
        for (std::size_t in = 0; in < s.inner; ++in) dx[(o * s.len + index) * s.inner + in] += self.grad[o * s.inner + in];
  });
}

Tensor tile(const Tensor& x, std::size_t count) {
  if (count == 0) throw InvalidArgument("tile count must be positive");
  Shape shape = x.shape();
  shape.insert(shape.begin(), count);
  const std::size_t n = x.numel();
  std::vector<float> y;
  y.reserve(n * count);
  for (std::size_t c = 0; c < count; ++c) y.insert(y.end(), x.values().begin(), x.values().end());
  NodePtr xn = x.node();
  return Tensor::make_result(std::move(shape), std::move(y), {x}, [=](Node& self) {
    if (float* dx = grad_of(xn))
      for (std::size_t i = 0; i < self.grad.size(); ++i) dx[i % n] += self.grad[i];
  });
}

Tensor sum(const Tensor& x) {
  const auto xv = x.values();
  const double total = std::accumulate(xv.begin(), xv.end(), 0.0);
  NodePtr xn = x.node();
  return Tensor::make_result({1}, {static_cast<float>(total)}, {x}, [=](Node& self) {
    if (float* dx = grad_of(xn))
      for (std::size_t i = 0; i < xn->value.size(); ++i) dx[i] += self.grad[0];
  });
}

Tensor weighted_sum(const Tensor& x, std::span<const float> weights) {
  if (weights.size() != x.numel()) throw InvalidArgument("weighted_sum: weight count mismatch");
  const auto xv = x.values();
  double total = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) total += static_cast<double>(xv[i]) * weights[i];
  std::vector<float> w(weights.begin(), weights.end());
  NodePtr xn = x.node();
  return Tensor::make_result({1}, {static_cast<float>(total)}, {x}, [=, w = std::move(w)](Node& self) {
    if (float* dx = grad_of(xn))
      for (std::size_t i = 0; i < w.size(); ++i) dx[i] += w[i] * self.grad[0];
  });
}

Tensor mmse_loss(const Tensor& pred, const Tensor& target, std::span<const float> row_weights) {
  if (pred.shape() != target.shape()) {
    throw InvalidArgument("mmse_loss: prediction " + shape_string(pred.shape()) + " vs target " +
                          shape_string(target.shape()));
  }
  if (pred.rank() < 2) throw InvalidArgument("mmse_loss: needs [..., rows, cols]");
  const std::size_t rows = pred.shape()[pred.rank() - 2];
  const std::size_t cols = pred.shape().back();
  if (row_weights.size() != rows) throw InvalidArgument("mmse_loss: one weight per row required");
  const auto p = pred.values();
  const auto t = target.values();
  const std::size_t m = p.size();
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = static_cast<double>(p[i]) - t[i];
    total += row_weights[(i / cols) % rows] * r * r;
  }
  std::vector<float> w(row_weights.begin(), row_weights.end());
  NodePtr pn = pred.node(), tn = target.node();
  return Tensor::make_result({1}, {static_cast<float>(total / static_cast<double>(m))}, {pred},
                             [=, w = std::move(w)](Node& self) {
    float* dp = grad_of(pn);
    if (!dp) return;
    const float g = self.grad[0] * 2.0f / static_cast<float>(m);
    for (std::size_t i = 0; i < m; ++i) dp[i] += g * w[(i / cols) % rows] * (pn->value[i] - tn->value[i]);
  });
}

}  // namespace lidarsynth
