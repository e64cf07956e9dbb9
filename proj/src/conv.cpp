// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#include <cmath>

#include "autograd_util.hpp"
#include "gemm.hpp"
#include "lidarsynth/error.hpp"
#include "lidarsynth/ops.hpp"

namespace lidarsynth {

using detail::grad_of;
using detail::Node;
using detail::NodePtr;

std::size_t conv_transpose_extent(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t padding) {
  const long long out = (static_cast<long long>(in) - 1) * static_cast<long long>(stride) -
                        2 * static_cast<long long>(padding) + static_cast<long long>(kernel);
  if (out <= 0) throw InvalidArgument("conv_transpose2d: non-positive output extent");
  return static_cast<std::size_t>(out);
}

namespace {

struct ConvGeometry {
  std::size_t n, cin, cout, h, w, k, stride, pad, oh, ow;

  // Output coordinate hit by input (iy, ix) through kernel tap (ky, kx), or -1.
  long long out_y(std::size_t iy, std::size_t ky) const {
    const long long y = static_cast<long long>(iy * stride + ky) - static_cast<long long>(pad);
    return (y >= 0 && y < static_cast<long long>(oh)) ? y : -1;
  }
  long long out_x(std::size_t ix, std::size_t kx) const {
    const long long x = static_cast<long long>(ix * stride + kx) - static_cast<long long>(pad);
    return (x >= 0 && x < static_cast<long long>(ow)) ? x : -1;
  }
};

// cols[(co, ky, kx), (iy, ix)] scattered onto out[co, oy, ox].
void col2im(const ConvGeometry& g, const float* cols, float* out) {
  const std::size_t hw = g.h * g.w;
  for (std::size_t co = 0; co < g.cout; ++co)
    for (std::size_t ky = 0; ky < g.k; ++ky)
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        const float* src = cols + ((co * g.k + ky) * g.k + kx) * hw;
        float* dst = out + co * g.oh * g.ow;
        for (std::size_t iy = 0; iy < g.h; ++iy) {
          const long long oy = g.out_y(iy, ky);
          if (oy < 0) continue;
          for (std::size_t ix = 0; ix < g.w; ++ix) {
            const long long ox = g.out_x(ix, kx);
            if (ox < 0) continue;
            dst[static_cast<std::size_t>(oy) * g.ow + static_cast<std::size_t>(ox)] += src[iy * g.w + ix];
          }
        }
      }
}

// Gathers dout[co, oy, ox] back into the column layout (zero where out of range).
void im2col(const ConvGeometry& g, const float* dout, float* cols) {
  const std::size_t hw = g.h * g.w;
  for (std::size_t co = 0; co < g.cout; ++co)
    for (std::size_t ky = 0; ky < g.k; ++ky)
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        float* dst = cols + ((co * g.k + ky) * g.k + kx) * hw;
        const float* src = dout + co * g.oh * g.ow;
        for (std::size_t iy = 0; iy < g.h; ++iy) {
          const long long oy = g.out_y(iy, ky);
          for (std::size_t ix = 0; ix < g.w; ++ix) {
            const long long ox = g.out_x(ix, kx);
            dst[iy * g.w + ix] = (oy < 0 || ox < 0)
                                     ? 0.0f
                                     : src[static_cast<std::size_t>(oy) * g.ow + static_cast<std::size_t>(ox)];
          }
        }
      }
}

}  // namespace

Tensor conv_transpose2d(const Tensor& x, const Tensor& kernels, const Tensor& bias, std::size_t stride,
                        std::size_t padding) {
  if (x.rank() != 3 && x.rank() != 4) throw InvalidArgument("conv_transpose2d: input must be [C,H,W] or [N,C,H,W]");
  if (kernels.rank() != 4 || kernels.dim(2) != kernels.dim(3)) {
    throw InvalidArgument("conv_transpose2d: kernels must be [C_in, C_out, k, k]");
  }
  if (stride == 0) throw InvalidArgument("conv_transpose2d: stride must be positive");
  const bool batched = x.rank() == 4;
  ConvGeometry g{};
  g.n = batched ? x.dim(0) : 1;
  g.cin = x.dim(batched ? 1 : 0);
  g.h = x.dim(batched ? 2 : 1);
  g.w = x.dim(batched ? 3 : 2);
  if (kernels.dim(0) != g.cin) throw InvalidArgument("conv_transpose2d: channel mismatch");
  g.cout = kernels.dim(1);
  g.k = kernels.dim(2);
  g.stride = stride;
  g.pad = padding;
  g.oh = conv_transpose_extent(g.h, g.k, stride, padding);
  g.ow = conv_transpose_extent(g.w, g.k, stride, padding);
  if (bias.defined() && bias.numel() != g.cout) throw InvalidArgument("conv_transpose2d: bias must be [C_out]");

  const std::size_t hw = g.h * g.w;
  const std::size_t ckk = g.cout * g.k * g.k;
  const std::size_t out_plane = g.oh * g.ow;
  std::vector<float> y(g.n * g.cout * out_plane, 0.0f);
  std::vector<float> cols(ckk * hw);
  const float* wv = kernels.values().data();
  for (std::size_t s = 0; s < g.n; ++s) {
    // cols = W^T X with W viewed as [C_in, C_out*k*k] and X as [C_in, H*W].
    detail::gemm(true, false, ckk, hw, g.cin, 1.0f, wv, x.values().data() + s * g.cin * hw, 0.0f, cols.data());
    float* ys = y.data() + s * g.cout * out_plane;
    col2im(g, cols.data(), ys);
    if (bias.defined()) {
      const auto b = bias.values();
      for (std::size_t co = 0; co < g.cout; ++co)
        for (std::size_t i = 0; i < out_plane; ++i) ys[co * out_plane + i] += b[co];
    }
  }

  Shape shape = batched ? Shape{g.n, g.cout, g.oh, g.ow} : Shape{g.cout, g.oh, g.ow};
  NodePtr xn = x.node(), kn = kernels.node(), bn = bias.defined() ? bias.node() : nullptr;
  std::vector<Tensor> inputs{x, kernels};
  if (bias.defined()) inputs.push_back(bias);
  return Tensor::make_result(std::move(shape), std::move(y), std::move(inputs), [=](Node& self) {
    float* dx = grad_of(xn);
    float* dk = grad_of(kn);
    float* db = grad_of(bn);
    std::vector<float> dcols(ckk * hw);
    for (std::size_t s = 0; s < g.n; ++s) {
      const float* dys = self.grad.data() + s * g.cout * out_plane;
      if (db)
        for (std::size_t co = 0; co < g.cout; ++co)
          for (std::size_t i = 0; i < out_plane; ++i) db[co] += dys[co * out_plane + i];
      if (!dx && !dk) continue;
      im2col(g, dys, dcols.data());
      if (dx) detail::gemm(false, false, g.cin, hw, ckk, 1.0f, kn->value.data(), dcols.data(), 1.0f, dx + s * g.cin * hw);
      if (dk)
        detail::gemm(false, true, g.cin, ckk, hw, 1.0f, xn->value.data() + s * g.cin * hw, dcols.data(), 1.0f, dk);
    }
  });
}

Tensor batch_norm2d(const Tensor& x, const Tensor& gain, const Tensor& bias, Tensor& running_mean,
                    Tensor& running_var, Mode mode, BatchNormOptions options) {
  if (x.rank() != 4) throw InvalidArgument("batch_norm2d: input must be [N, C, H, W]");
  const std::size_t N = x.dim(0);
  const std::size_t C = x.dim(1);
  const std::size_t plane = x.dim(2) * x.dim(3);
  if (gain.numel() != C || bias.numel() != C || running_mean.numel() != C || running_var.numel() != C) {
    throw InvalidArgument("batch_norm2d: per-channel tensors must have C entries");
  }
  if (mode == Mode::train && N < 2) throw InvalidArgument("batch_norm2d: training mode needs a batch of at least 2");

  const auto xv = x.values();
  const auto g = gain.values();
  const auto b = bias.values();
  const std::size_t count = N * plane;
  std::vector<float> mean(C);
  std::vector<float> inv_std(C);
  if (mode == Mode::train) {
    auto rm = running_mean.mutable_values();
    auto rv = running_var.mutable_values();
    for (std::size_t c = 0; c < C; ++c) {
      double m = 0.0;
      for (std::size_t n = 0; n < N; ++n)
        for (std::size_t i = 0; i < plane; ++i) m += xv[(n * C + c) * plane + i];
      m /= static_cast<double>(count);
      double var = 0.0;
      for (std::size_t n = 0; n < N; ++n)
        for (std::size_t i = 0; i < plane; ++i) {
          const double d = xv[(n * C + c) * plane + i] - m;
          var += d * d;
        }
      const double biased = var / static_cast<double>(count);
      const double unbiased = var / static_cast<double>(count - 1);
      mean[c] = static_cast<float>(m);
      inv_std[c] = static_cast<float>(1.0 / std::sqrt(biased + options.eps));
      rm[c] = (1.0f - options.momentum) * rm[c] + options.momentum * static_cast<float>(m);
      rv[c] = (1.0f - options.momentum) * rv[c] + options.momentum * static_cast<float>(unbiased);
    }
  } else {
    const auto rm = running_mean.values();
    const auto rv = running_var.values();
    for (std::size_t c = 0; c < C; ++c) {
      mean[c] = rm[c];
      inv_std[c] = 1.0f / std::sqrt(rv[c] + options.eps);
    }
  }

  std::vector<float> xhat(xv.size());
  std::vector<float> y(xv.size());
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t i = 0; i < plane; ++i) {
        const std::size_t idx = (n * C + c) * plane + i;
        xhat[idx] = (xv[idx] - mean[c]) * inv_std[c];
        y[idx] = g[c] * xhat[idx] + b[c];
      }

  NodePtr xn = x.node(), gn = gain.node(), bn = bias.node();
  const bool training = mode == Mode::train;
  return Tensor::make_result(x.shape(), std::move(y), {x, gain, bias},
                             [=, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
    const auto& dy = self.grad;
    float* dg = grad_of(gn);
    float* db = grad_of(bn);
    float* dx = grad_of(xn);
    for (std::size_t c = 0; c < C; ++c) {
      double sum_dy = 0.0;
      double sum_dy_h = 0.0;
      for (std::size_t n = 0; n < N; ++n)
        for (std::size_t i = 0; i < plane; ++i) {
          const std::size_t idx = (n * C + c) * plane + i;
          sum_dy += dy[idx];
          sum_dy_h += static_cast<double>(dy[idx]) * xhat[idx];
        }
      if (dg) dg[c] += static_cast<float>(sum_dy_h);
      if (db) db[c] += static_cast<float>(sum_dy);
      if (!dx) continue;
      const double gc = gn->value[c];
      for (std::size_t n = 0; n < N; ++n)
        for (std::size_t i = 0; i < plane; ++i) {
          const std::size_t idx = (n * C + c) * plane + i;
          if (training) {
            const double dh = gc * dy[idx];
            const double mean_dh = gc * sum_dy / static_cast<double>(count);
            const double mean_dh_h = gc * sum_dy_h / static_cast<double>(count);
            dx[idx] += static_cast<float>(inv_std[c] * (dh - mean_dh - xhat[idx] * mean_dh_h));
          } else {
            dx[idx] += static_cast<float>(gc * inv_std[c] * dy[idx]);
          }
        }
    }
  });
}

}  // namespace lidarsynth
