// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace lidarsynth {

struct Point3 {
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;

  friend bool operator==(const Point3&, const Point3&) = default;
};

/// Range (meters) and direction (degrees) of a point seen from the origin.
/// theta is the azimuth in [-180, 180), phi the elevation above the XY plane.
struct Spherical {
  double range = 0.0;
  double theta = 0.0;
  double phi = 0.0;
};

struct AngleRegion {
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;

  std::size_t bins() const;
  friend bool operator==(const AngleRegion&, const AngleRegion&) = default;
};

/// Angular layout of a LiDAR range image: uniform azimuth columns and
/// piecewise-uniform elevation rows.
class GridSpec {
 public:
  GridSpec(double theta_lo, double theta_hi, double theta_step,
           std::vector<AngleRegion> phi_regions, double max_range);

  /// 1088 x 1440 grid: 0.25 deg azimuth, elevation 0.25 deg outside
  /// [-5, 5) and 0.015625 deg inside.
  static GridSpec full_scale();

  double theta_lo() const { return theta_lo_; }
  double theta_hi() const { return theta_hi_; }
  double theta_step() const { return theta_step_; }
  const std::vector<AngleRegion>& phi_regions() const { return phi_regions_; }
  double max_range() const { return max_range_; }
  double phi_lo() const { return phi_regions_.front().lo; }
  double phi_hi() const { return phi_regions_.back().hi; }

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }

  /// Lower edge, center, and width of a row (elevation) or column (azimuth).
  double row_lo(std::size_t row) const;
  double row_step(std::size_t row) const;
  double row_center(std::size_t row) const { return row_lo(row) + 0.5 * row_step(row); }
  double col_lo(std::size_t col) const { return theta_lo_ + static_cast<double>(col) * theta_step_; }
  double col_center(std::size_t col) const { return col_lo(col) + 0.5 * theta_step_; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  double theta_lo_;
  double theta_hi_;
  double theta_step_;
  std::vector<AngleRegion> phi_regions_;
  double max_range_;
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> region_first_row_;
};

struct BinIndex {
  std::size_t row = 0;
  std::size_t col = 0;

  friend bool operator==(const BinIndex&, const BinIndex&) = default;
};

/// Dense range image on a GridSpec, row-major n_rows x n_cols, meters.
/// Zero marks "no return".
class PolarRaster {
 public:
  explicit PolarRaster(GridSpec grid);
  PolarRaster(GridSpec grid, std::vector<float> data);

  const GridSpec& grid() const { return grid_; }
  std::size_t rows() const { return grid_.n_rows(); }
  std::size_t cols() const { return grid_.n_cols(); }
  std::span<const float> data() const { return data_; }

  float at(std::size_t row, std::size_t col) const { return data_[row * cols() + col]; }
  /// Throws InvalidArgument if value is negative, non-finite or above max_range.
  void set(std::size_t row, std::size_t col, float value);
  std::size_t nonzero_count() const;

  friend bool operator==(const PolarRaster&, const PolarRaster&) = default;

 private:
  GridSpec grid_;
  std::vector<float> data_;
};

Spherical to_spherical(const Point3& p);
Point3 from_spherical(double range, double theta_deg, double phi_deg);

/// Half-open binning; std::nullopt when the direction falls outside the grid.
std::optional<BinIndex> bin_index(const GridSpec& grid, double theta, double phi);

struct RasterizeResult {
  PolarRaster raster;
  std::size_t dropped = 0;
};

/// Keeps the nearest return per bin. Out-of-grid, out-of-range and origin
/// points are dropped and counted.
RasterizeResult rasterize(std::span<const Point3> cloud, const GridSpec& grid);

/// One point per nonzero bin, at the bin-center direction and stored range.
std::vector<Point3> derasterize(const PolarRaster& raster);

}  // namespace lidarsynth
