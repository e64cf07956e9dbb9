// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "lidarsynth/error.hpp"
#include "lidarsynth/radar_dsp.hpp"
#include "lidarsynth/synthgen.hpp"

using namespace lidarsynth;
using cd = std::complex<double>;

namespace {

// O(N^2) reference, written independently of the library.
std::vector<cd> naive_dft(const std::vector<cd>& x) {
  const std::size_t n = x.size();
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    long double re = 0, im = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const long double ang = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>((k * j) % n) / n;
      re += x[j].real() * std::cos(ang) - x[j].imag() * std::sin(ang);
      im += x[j].real() * std::sin(ang) + x[j].imag() * std::cos(ang);
    }
    out[k] = cd(static_cast<double>(re), static_cast<double>(im));
  }
  return out;
}

std::vector<cd> random_signal(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<cd> x(n);
  for (auto& v : x) v = cd(g(rng), g(rng));
  return x;
}

double rel_error(const std::vector<cd>& a, const std::vector<cd>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

std::pair<std::size_t, std::size_t> argmax(const RadarMap& m) {
  const auto it = std::max_element(m.data.begin(), m.data.end());
  const auto i = static_cast<std::size_t>(it - m.data.begin());
  return {i / m.cols, i % m.cols};
}

Scene one_target(float x, float y, float v, float reflectivity = 1.0f) {
  Scene s;
  Primitive p;
  p.center = {x, y, 0.0f};
  p.radial_velocity = v;
  p.reflectivity = reflectivity;
  s.primitives.push_back(p);
  return s;
}

}  // namespace

TEST(Fft, KnownSmallTransforms) {
  const std::vector<cd> impulse{1, 0, 0, 0};
  for (const auto& v : fft_1d(std::span<const cd>(impulse))) EXPECT_NEAR(std::abs(v - cd(1, 0)), 0.0, 1e-15);

  const std::vector<cd> ramp{1, 2, 3, 4};
  const auto f = fft_1d(std::span<const cd>(ramp));
  const std::vector<cd> expected{{10, 0}, {-2, 2}, {-2, 0}, {-2, -2}};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(f[i] - expected[i]), 0.0, 1e-12) << i;

  const std::vector<cd> three{1, 1, 1};
  const auto g = fft_1d(std::span<const cd>(three));
  EXPECT_NEAR(std::abs(g[0] - cd(3, 0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(g[1]), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(g[2]), 0.0, 1e-12);
}

TEST(Fft, MatchesNaiveDftForAllLengthsUpTo64) {
  std::mt19937_64 rng(17);
  for (std::size_t n = 1; n <= 64; ++n) {
    const auto x = random_signal(n, rng);
    EXPECT_LT(rel_error(fft_1d(std::span<const cd>(x)), naive_dft(x)), 1e-6) << "n=" << n;
  }
}

TEST(Fft, ParsevalHolds) {
  std::mt19937_64 rng(23);
  for (std::size_t n : {1u, 2u, 7u, 16u, 30u, 64u, 256u}) {
    const auto x = random_signal(n, rng);
    const auto f = fft_1d(std::span<const cd>(x));
    double et = 0, ef = 0;
    for (auto v : x) et += std::norm(v);
    for (auto v : f) ef += std::norm(v);
    EXPECT_NEAR(ef / static_cast<double>(n), et, 1e-5 * et) << "n=" << n;
  }
}

TEST(Fft, InverseRoundTrips) {
  std::mt19937_64 rng(29);
  for (std::size_t n : {1u, 5u, 8u, 12u, 128u}) {
    const auto x = random_signal(n, rng);
    const auto back = ifft_1d(std::span<const cd>(fft_1d(std::span<const cd>(x))));
    EXPECT_LT(rel_error(back, x), 1e-12) << "n=" << n;
  }
  EXPECT_THROW(fft_1d(std::span<const cd>()), InvalidArgument);
}

TEST(Fft, FloatOverloadAgreesWithDouble) {
  std::mt19937_64 rng(31);
  const auto x = random_signal(48, rng);
  std::vector<cfloat> xf(x.begin(), x.end());
  const auto ff = fft_1d(std::span<const cfloat>(xf));
  const auto fd = naive_dft(std::vector<cd>(xf.begin(), xf.end()));
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(std::abs(cd(ff[i]) - fd[i]), 0.0, 1e-4);
}

TEST(RadarCube, InterleavedRoundTripAndValidation) {
  std::vector<float> raw{1, 2, 3, 4, 5, 6, 7, 8};
  const auto cube = RadarCube::from_interleaved(1, 2, 2, raw);
  EXPECT_EQ(cube.at(0, 1, 0), cfloat(5, 6));
  EXPECT_EQ(cube.interleaved(), raw);
  EXPECT_THROW(RadarCube::from_interleaved(1, 2, 3, raw), InvalidArgument);
  raw[3] = NAN;
  EXPECT_THROW(RadarCube::from_interleaved(1, 2, 2, raw), InvalidArgument);
}

TEST(RadarMaps, StaticTargetPeaksAtPredictedBins) {
  RadarConfig rc{8, 64, 32, 40.0, 20.0};
  const auto cube = simulate_radar(one_target(10.0f, 0.0f, 0.0f), rc, 0.0, 1);
  const auto rt = range_transform(cube);
  const auto ra = range_angle_map(rt);
  ASSERT_EQ(ra.rows, 8u);
  ASSERT_EQ(ra.cols, 64u);
  EXPECT_EQ(argmax(ra), (std::pair<std::size_t, std::size_t>{4, 16}));  // center angle, n_samples / 4
  EXPECT_FLOAT_EQ(ra.at(4, 16), 1.0f);
  const auto rv = range_velocity_map(rt);
  EXPECT_EQ(argmax(rv), (std::pair<std::size_t, std::size_t>{16, 16}));  // zero velocity row
}

TEST(RadarMaps, MovingTargetPeaksAtVelocityBin) {
  RadarConfig rc{4, 32, 32, 40.0, 32.0};
  // f_v = 8 / 32 = 0.25 -> 8 bins above the zero-velocity row
  const auto rv = range_velocity_map(range_transform(simulate_radar(one_target(20.0f, 0.0f, 8.0f), rc, 0.0, 1)));
  EXPECT_EQ(argmax(rv), (std::pair<std::size_t, std::size_t>{24, 16}));
  const auto away = range_velocity_map(range_transform(simulate_radar(one_target(20.0f, 0.0f, -8.0f), rc, 0.0, 1)));
  EXPECT_EQ(argmax(away), (std::pair<std::size_t, std::size_t>{8, 16}));
}

TEST(RadarMaps, OffAxisTargetShiftsAngleRow) {
  RadarConfig rc{8, 32, 16, 40.0, 20.0};
  // azimuth 30 deg: f_a = 0.25 -> 2 rows above center; range 20 -> bin 16
  const double az = 30.0 * std::numbers::pi / 180.0;
  const auto ra = range_angle_map(range_transform(
      simulate_radar(one_target(static_cast<float>(20 * std::cos(az)), static_cast<float>(20 * std::sin(az)), 0), rc, 0, 1)));
  EXPECT_EQ(argmax(ra), (std::pair<std::size_t, std::size_t>{6, 16}));
}

TEST(RadarMaps, TwoTargetsGiveTwoLocalMaxima) {
  RadarConfig rc{8, 64, 16, 64.0, 20.0};
  Scene s = one_target(8.0f, 0.0f, 0.0f);
  s.primitives.push_back(one_target(40.0f, 0.0f, 0.0f).primitives[0]);
  const auto ra = range_angle_map(range_transform(simulate_radar(s, rc, 0.0, 1)));
  EXPECT_FLOAT_EQ(ra.at(4, 8), 1.0f);
  EXPECT_GT(ra.at(4, 40), ra.at(4, 39));
  EXPECT_GT(ra.at(4, 40), ra.at(4, 41));
  EXPECT_GT(ra.at(4, 40), 0.9f);
}

TEST(RadarMaps, PeakInvariantToAmplitudeScaling) {
  RadarConfig rc{4, 32, 16, 40.0, 20.0};
  const auto a = range_angle_map(range_transform(simulate_radar(one_target(15, 0, 0, 0.2f), rc, 0, 1)));
  const auto b = range_angle_map(range_transform(simulate_radar(one_target(15, 0, 0, 0.9f), rc, 0, 1)));
  EXPECT_EQ(argmax(a), argmax(b));
}

TEST(RadarMaps, NormalizedIntoUnitInterval) {
  RadarConfig rc{4, 32, 16, 40.0, 20.0};
  Scene s = one_target(12, 3, 2);
  s.primitives.push_back(one_target(25, -4, -3).primitives[0]);
  const auto ra = range_angle_map(range_transform(simulate_radar(s, rc, 0.3, 9)));
  EXPECT_FLOAT_EQ(*std::min_element(ra.data.begin(), ra.data.end()), 0.0f);
  EXPECT_FLOAT_EQ(*std::max_element(ra.data.begin(), ra.data.end()), 1.0f);
}

TEST(NormalizeMap, DegenerateInputs) {
  std::vector<float> zeros(6, 0.0f);
  normalize_map(zeros);
  for (float v : zeros) EXPECT_EQ(v, 0.0f);
  std::vector<float> flat(6, 3.0f);
  normalize_map(flat);
  for (float v : flat) EXPECT_EQ(v, 1.0f);
  std::vector<float> ramp{0.0f, std::exp(1.0f) - 1.0f};
  normalize_map(ramp);
  EXPECT_FLOAT_EQ(ramp[0], 0.0f);
  EXPECT_FLOAT_EQ(ramp[1], 1.0f);
}

TEST(RadarMaps, EmptySceneWithoutNoiseIsZero) {
  RadarConfig rc{4, 16, 8, 40.0, 20.0};
  const auto cube = simulate_radar(Scene{}, rc, 0.0, 3);
  for (auto v : cube.data()) EXPECT_EQ(v, cfloat(0, 0));
  const auto ra = range_angle_map(range_transform(cube));
  for (float v : ra.data) EXPECT_EQ(v, 0.0f);
}
