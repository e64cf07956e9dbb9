// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace lidarsynth {

using cfloat = std::complex<float>;

/// Complex FMCW measurement block indexed (rx, sample, chirp), row-major.
class RadarCube {
 public:
  RadarCube(std::size_t n_rx, std::size_t n_samples, std::size_t n_chirps);
  RadarCube(std::size_t n_rx, std::size_t n_samples, std::size_t n_chirps, std::vector<cfloat> data);

  /// Builds a cube from interleaved (re, im) floats; rejects bad lengths and non-finite values.
  static RadarCube from_interleaved(std::size_t n_rx, std::size_t n_samples, std::size_t n_chirps,
                                    std::span<const float> interleaved);
  std::vector<float> interleaved() const;

  std::size_t n_rx() const { return n_rx_; }
  std::size_t n_samples() const { return n_samples_; }
  std::size_t n_chirps() const { return n_chirps_; }

  cfloat& at(std::size_t rx, std::size_t sample, std::size_t chirp) {
    return data_[(rx * n_samples_ + sample) * n_chirps_ + chirp];
  }
  const cfloat& at(std::size_t rx, std::size_t sample, std::size_t chirp) const {
    return data_[(rx * n_samples_ + sample) * n_chirps_ + chirp];
  }
  std::span<const cfloat> data() const { return data_; }
  std::span<cfloat> data() { return data_; }

 private:
  std::size_t n_rx_;
  std::size_t n_samples_;
  std::size_t n_chirps_;
  std::vector<cfloat> data_;
};

enum class RadarMapKind { range_angle, range_velocity };

/// Normalized [0, 1] magnitude map. Rows are angle (or velocity) bins with
/// zero frequency at row rows()/2; columns are range bins.
struct RadarMap {
  RadarMapKind kind = RadarMapKind::range_angle;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  float at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Unnormalized forward DFT, X[k] = sum_n x[n] exp(-2 pi i k n / N).
/// Radix-2 for powers of two, direct summation otherwise; accumulates in double.
std::vector<std::complex<double>> fft_1d(std::span<const std::complex<double>> x);
std::vector<cfloat> fft_1d(std::span<const cfloat> x);

/// Inverse of fft_1d, including the 1/N factor.
std::vector<std::complex<double>> ifft_1d(std::span<const std::complex<double>> x);

/// FFT along the samples axis of every (rx, chirp) fiber.
RadarCube range_transform(const RadarCube& cube);

/// Angle FFT over rx, magnitudes summed over chirps, shifted, log-compressed, normalized.
RadarMap range_angle_map(const RadarCube& range_cube);

/// Velocity FFT over chirps, magnitudes summed over rx, shifted, log-compressed, normalized.
RadarMap range_velocity_map(const RadarCube& range_cube);

/// Applies log(1 + v) then min-max scales into [0, 1] in place.
void normalize_map(std::span<float> values);

}  // namespace lidarsynth
