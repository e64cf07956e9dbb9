// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#include "lidarsynth/radar_dsp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "lidarsynth/error.hpp"

namespace lidarsynth {
namespace {

using cdouble = std::complex<double>;

void check_dims(std::size_t n_rx, std::size_t n_samples, std::size_t n_chirps) {
  if (n_rx == 0 || n_samples == 0 || n_chirps == 0) {
    throw InvalidArgument("radar cube dimensions must be >= 1");
  }
}

// Twiddle exp(-2 pi i m / n) with the exponent reduced modulo n first.
cdouble twiddle(std::size_t m, std::size_t n) {
  const double angle = -2.0 * std::numbers::pi * static_cast<double>(m % n) / static_cast<double>(n);
  return {std::cos(angle), std::sin(angle)};
}

void radix2_in_place(std::vector<cdouble>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const cdouble w = twiddle(k, len);
        const cdouble u = a[start + k];
        const cdouble v = a[start + k + half] * w;
        a[start + k] = u + v;
        a[start + k + half] = u - v;
      }
    }
  }
}

std::vector<cdouble> direct_dft(std::span<const cdouble> x) {
  const std::size_t n = x.size();
  std::vector<cdouble> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cdouble acc{0.0, 0.0};
    for (std::size_t t = 0; t < n; ++t) acc += x[t] * twiddle(k * t, n);
    out[k] = acc;
  }
  return out;
}

std::vector<cfloat> fft_fiber(std::vector<cfloat>& fiber) { return fft_1d(std::span<const cfloat>(fiber)); }

}  // namespace

RadarCube::RadarCube(std::size_t n_rx, std::size_t n_samples, std::size_t n_chirps)
    : n_rx_(n_rx), n_samples_(n_samples), n_chirps_(n_chirps) {
  check_dims(n_rx, n_samples, n_chirps);
  data_.assign(n_rx * n_samples * n_chirps, cfloat{0.0f, 0.0f});
}

RadarCube::RadarCube(std::size_t n_rx, std::size_t n_samples, std::size_t n_chirps, std::vector<cfloat> data)
    : n_rx_(n_rx), n_samples_(n_samples), n_chirps_(n_chirps), data_(std::move(data)) {
  check_dims(n_rx, n_samples, n_chirps);
  if (data_.size() != n_rx * n_samples * n_chirps) {
    throw InvalidArgument("radar cube data length does not match dimensions");
  }
  for (const auto& v : data_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw InvalidArgument("radar cube contains non-finite values");
    }
  }
}

RadarCube RadarCube::from_interleaved(std::size_t n_rx, std::size_t n_samples, std::size_t n_chirps,
                                      std::span<const float> interleaved) {
  check_dims(n_rx, n_samples, n_chirps);
  if (interleaved.size() != 2 * n_rx * n_samples * n_chirps) {
    throw InvalidArgument("interleaved radar data length must be 2 * n_rx * n_samples * n_chirps");
  }
  std::vector<cfloat> data(interleaved.size() / 2);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = {interleaved[2 * i], interleaved[2 * i + 1]};
  return RadarCube(n_rx, n_samples, n_chirps, std::move(data));
}

std::vector<float> RadarCube::interleaved() const {
  std::vector<float> out(2 * data_.size());
  for (std::size_t i = 0; i < data_.size(); ++i) {
    out[2 * i] = data_[i].real();
    out[2 * i + 1] = data_[i].imag();
  }
  return out;
}

std::vector<cdouble> fft_1d(std::span<const cdouble> x) {
  if (x.empty()) throw InvalidArgument("fft_1d needs at least one element");
  if (!std::has_single_bit(x.size())) return direct_dft(x);
  std::vector<cdouble> a(x.begin(), x.end());
  radix2_in_place(a);
  return a;
}

std::vector<cfloat> fft_1d(std::span<const cfloat> x) {
  std::vector<cdouble> wide(x.begin(), x.end());
  const auto spectrum = fft_1d(std::span<const cdouble>(wide));
  return {spectrum.begin(), spectrum.end()};
}

std::vector<cdouble> ifft_1d(std::span<const cdouble> x) {
  if (x.empty()) throw InvalidArgument("ifft_1d needs at least one element");
  // ifft(x) = conj(fft(conj(x))) / N
  std::vector<cdouble> conj_x(x.size());
  std::transform(x.begin(), x.end(), conj_x.begin(), [](cdouble v) { return std::conj(v); });
  auto out = fft_1d(std::span<const cdouble>(conj_x));
  const double scale = 1.0 / static_cast<double>(x.size());
  for (auto& v : out) v = std::conj(v) * scale;
  return out;
}

RadarCube range_transform(const RadarCube& cube) {
  RadarCube out(cube.n_rx(), cube.n_samples(), cube.n_chirps());
  std::vector<cfloat> fiber(cube.n_samples());
  for (std::size_t rx = 0; rx < cube.n_rx(); ++rx) {
    for (std::size_t chirp = 0; chirp < cube.n_chirps(); ++chirp) {
      for (std::size_t s = 0; s < cube.n_samples(); ++s) fiber[s] = cube.at(rx, s, chirp);
      const auto spectrum = fft_fiber(fiber);
      for (std::size_t s = 0; s < cube.n_samples(); ++s) out.at(rx, s, chirp) = spectrum[s];
    }
  }
  return out;
}

void normalize_map(std::span<float> values) {
  if (values.empty()) return;
  for (auto& v : values) v = std::log1p(v);
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const float lo = *lo_it;
  const float hi = *hi_it;
  const float span = hi - lo;
  if (span > 0.0f) {
    for (auto& v : values) v = std::clamp((v - lo) / span, 0.0f, 1.0f);
  } else {
    std::fill(values.begin(), values.end(), hi > 0.0f ? 1.0f : 0.0f);
  }
}

RadarMap range_angle_map(const RadarCube& range_cube) {
  const std::size_t n_rx = range_cube.n_rx();
  const std::size_t n_samples = range_cube.n_samples();
  RadarMap map{RadarMapKind::range_angle, n_rx, n_samples, std::vector<float>(n_rx * n_samples, 0.0f)};
  std::vector<double> acc(n_rx * n_samples, 0.0);
  std::vector<cfloat> fiber(n_rx);
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (std::size_t chirp = 0; chirp < range_cube.n_chirps(); ++chirp) {
      for (std::size_t rx = 0; rx < n_rx; ++rx) fiber[rx] = range_cube.at(rx, s, chirp);
      const auto spectrum = fft_fiber(fiber);
      for (std::size_t k = 0; k < n_rx; ++k) {
        const std::size_t row = (k + n_rx / 2) % n_rx;
        acc[row * n_samples + s] += std::abs(spectrum[k]);
      }
    }
  }
  std::transform(acc.begin(), acc.end(), map.data.begin(), [](double v) { return static_cast<float>(v); });
  normalize_map(map.data);
  return map;
}

RadarMap range_velocity_map(const RadarCube& range_cube) {
  const std::size_t n_chirps = range_cube.n_chirps();
  const std::size_t n_samples = range_cube.n_samples();
  RadarMap map{RadarMapKind::range_velocity, n_chirps, n_samples,
               std::vector<float>(n_chirps * n_samples, 0.0f)};
  std::vector<double> acc(n_chirps * n_samples, 0.0);
  std::vector<cfloat> fiber(n_chirps);
  for (std::size_t rx = 0; rx < range_cube.n_rx(); ++rx) {
    for (std::size_t s = 0; s < n_samples; ++s) {
      for (std::size_t chirp = 0; chirp < n_chirps; ++chirp) fiber[chirp] = range_cube.at(rx, s, chirp);
      const auto spectrum = fft_fiber(fiber);
      for (std::size_t k = 0; k < n_chirps; ++k) {
        const std::size_t row = (k + n_chirps / 2) % n_chirps;
        acc[row * n_samples + s] += std::abs(spectrum[k]);
      }
    }
  }
  std::transform(acc.begin(), acc.end(), map.data.begin(), [](double v) { return static_cast<float>(v); });
  normalize_map(map.data);
  return map;
}

}  // namespace lidarsynth
