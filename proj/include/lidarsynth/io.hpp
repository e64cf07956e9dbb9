// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lidarsynth/config.hpp"
#include "lidarsynth/geometry.hpp"
#include "lidarsynth/optim.hpp"

namespace lidarsynth {

/// LSTF tensor container:
///   "LSTF" | u8 version (1) | u8 rank | rank x u32 dims | prod(dims) x f32
/// All integers and floats little-endian, payload row-major.
struct TensorRecord {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;
};

inline constexpr std::uint8_t kLstfVersion = 1;
inline constexpr std::uint8_t kLsckVersion = 1;

void write_lstf(std::ostream& out, std::span<const std::uint32_t> dims, std::span<const float> data);
TensorRecord read_lstf(std::istream& in);
void save_lstf(const std::string& path, std::span<const std::uint32_t> dims, std::span<const float> data);
TensorRecord load_lstf(const std::string& path);

/// LSPC point cloud: "LSPC" | u32 count | count x (x, y, z) f32, little-endian.
void save_points(const std::string& path, std::span<const Point3> points);
std::vector<Point3> load_points(const std::string& path);

/// Raster as a rank-2 LSTF record [n_rows, n_cols]; the grid comes from config.
void save_raster(const std::string& path, const PolarRaster& raster);
PolarRaster load_raster(const std::string& path, const GridSpec& grid);

/// LSCK checkpoint:
///   "LSCK" | u8 version | u32 config length | config text (UTF-8)
///   | u32 tensor count | per tensor: u16 name length, name, LSTF record
/// Adam state, when saved, follows the parameters as "adam.m.<name>",
/// "adam.v.<name>" and "adam.step.<name>" records.
struct Checkpoint {
  Config config;
  ParamStore params;  // values only; kinds are re-derived when a model adopts them
};

void save_checkpoint(const std::string& path, const Config& config, const ParamStore& params, bool with_adam = true);
/// Reads a checkpoint. When `expected` is given, its model signature must
/// match the stored one unless `force` is set.
Checkpoint load_checkpoint(const std::string& path, const Config* expected = nullptr, bool force = false);

/// Binary PGM (P5, maxval 255), min-max scaled, highest elevation row on top.
/// An all-zero raster renders black; a constant nonzero raster mid-gray.
std::vector<std::uint8_t> render_pgm(const PolarRaster& raster);
/// Same for a bare row-major rows x cols array (row 0 = lowest elevation).
std::vector<std::uint8_t> render_pgm(std::size_t rows, std::size_t cols, std::span<const float> data);
void save_pgm(const std::string& path, const PolarRaster& raster);
void save_pgm(const std::string& path, std::size_t rows, std::size_t cols, std::span<const float> data);

}  // namespace lidarsynth
