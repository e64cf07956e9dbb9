// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#include "lidarsynth/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "lidarsynth/error.hpp"

namespace lidarsynth {
namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;
constexpr double kRadPerDeg = std::numbers::pi / 180.0;

std::size_t exact_bin_count(double lo, double hi, double step, const char* what) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && std::isfinite(step))) {
    throw InvalidArgument(std::string(what) + ": non-finite bounds");
  }
  if (!(hi > lo) || !(step > 0.0)) {
    throw InvalidArgument(std::string(what) + ": need hi > lo and step > 0");
  }
  const double ratio = (hi - lo) / step;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, n)) {
    throw InvalidArgument(std::string(what) + ": span is not a multiple of step");
  }
  return static_cast<std::size_t>(n);
}

// Index of the cell containing v in [lo, lo + n * step), guarding against
// the division landing one past the end through rounding.
std::size_t cell_of(double v, double lo, double step, std::size_t n) {
  auto i = static_cast<std::size_t>(std::floor((v - lo) / step));
  return std::min(i, n - 1);
}

double norm_of(const Point3& p) {
  const double x = p.x;
  const double y = p.y;
  const double z = p.z;
  return std::sqrt(x * x + y * y + z * z);
}

}  // namespace

std::size_t AngleRegion::bins() const { return exact_bin_count(lo, hi, step, "angle region"); }

GridSpec::GridSpec(double theta_lo, double theta_hi, double theta_step,
                   std::vector<AngleRegion> phi_regions, double max_range)
    : theta_lo_(theta_lo),
      theta_hi_(theta_hi),
      theta_step_(theta_step),
      phi_regions_(std::move(phi_regions)),
      max_range_(max_range) {
  n_cols_ = exact_bin_count(theta_lo_, theta_hi_, theta_step_, "theta axis");
  if (phi_regions_.empty()) {
    throw InvalidArgument("grid needs at least one phi region");
  }
  if (!(max_range_ > 0.0) || !std::isfinite(max_range_)) {
    throw InvalidArgument("grid max_range must be positive and finite");
  }
  for (std::size_t i = 0; i < phi_regions_.size(); ++i) {
    if (i > 0 && phi_regions_[i].lo != phi_regions_[i - 1].hi) {
      throw InvalidArgument("phi regions must be contiguous and ascending");
    }
    region_first_row_.push_back(n_rows_);
    n_rows_ += phi_regions_[i].bins();
  }
}

GridSpec GridSpec::full_scale() {
  return GridSpec(-180.0, 180.0, 0.25,
                  {{-60.0, -5.0, 0.25}, {-5.0, 5.0, 0.015625}, {5.0, 62.0, 0.25}}, 100.0);
}

double GridSpec::row_lo(std::size_t row) const {
  if (row >= n_rows_) throw InvalidArgument("row out of range");
  auto it = std::upper_bound(region_first_row_.begin(), region_first_row_.end(), row);
  const auto region = static_cast<std::size_t>(it - region_first_row_.begin()) - 1;
  const auto& r = phi_regions_[region];
  return r.lo + static_cast<double>(row - region_first_row_[region]) * r.step;
}

double GridSpec::row_step(std::size_t row) const {
  if (row >= n_rows_) throw InvalidArgument("row out of range");
  auto it = std::upper_bound(region_first_row_.begin(), region_first_row_.end(), row);
  return phi_regions_[static_cast<std::size_t>(it - region_first_row_.begin()) - 1].step;
}

PolarRaster::PolarRaster(GridSpec grid)
    : grid_(std::move(grid)), data_(grid_.n_rows() * grid_.n_cols(), 0.0f) {}

PolarRaster::PolarRaster(GridSpec grid, std::vector<float> data)
    : grid_(std::move(grid)), data_(std::move(data)) {
  if (data_.size() != grid_.n_rows() * grid_.n_cols()) {
    throw InvalidArgument("raster data size does not match grid dimensions");
  }
  const auto max_range = static_cast<float>(grid_.max_range());
  for (float v : data_) {
    if (!std::isfinite(v) || v < 0.0f || v > max_range) {
      throw InvalidArgument("raster value outside [0, max_range]");
    }
  }
}

void PolarRaster::set(std::size_t row, std::size_t col, float value) {
  if (row >= rows() || col >= cols()) throw InvalidArgument("raster index out of range");
  if (!std::isfinite(value) || value < 0.0f || value > static_cast<float>(grid_.max_range())) {
    throw InvalidArgument("raster value outside [0, max_range]");
  }
  data_[row * cols() + col] = value;
}

std::size_t PolarRaster::nonzero_count() const {
  return static_cast<std::size_t>(std::count_if(data_.begin(), data_.end(), [](float v) { return v != 0.0f; }));
}

Spherical to_spherical(const Point3& p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
    throw InvalidArgument("point has non-finite coordinates");
  }
  if (p.x == 0.0f && p.y == 0.0f && p.z == 0.0f) {
    throw InvalidArgument("origin has no direction");
  }
  const double x = p.x;
  const double y = p.y;
  const double z = p.z;
  Spherical s;
  s.range = std::sqrt(x * x + y * y + z * z);
  s.theta = std::atan2(y, x) * kDegPerRad;
  if (s.theta >= 180.0) s.theta -= 360.0;
  s.phi = std::atan2(z, std::hypot(x, y)) * kDegPerRad;
  return s;
}

Point3 from_spherical(double range, double theta_deg, double phi_deg) {
  const double th = theta_deg * kRadPerDeg;
  const double ph = phi_deg * kRadPerDeg;
  return {static_cast<float>(range * std::cos(ph) * std::cos(th)),
          static_cast<float>(range * std::cos(ph) * std::sin(th)),
          static_cast<float>(range * std::sin(ph))};
}

std::optional<BinIndex> bin_index(const GridSpec& grid, double theta, double phi) {
  if (!(theta >= grid.theta_lo() && theta < grid.theta_hi())) return std::nullopt;
  const auto col = cell_of(theta, grid.theta_lo(), grid.theta_step(), grid.n_cols());
  std::size_t first_row = 0;
  for (const auto& region : grid.phi_regions()) {
    const std::size_t n = region.bins();
    if (phi >= region.lo && phi < region.hi) {
      return BinIndex{first_row + cell_of(phi, region.lo, region.step, n), col};
    }
    first_row += n;
  }
  return std::nullopt;
}

RasterizeResult rasterize(std::span<const Point3> cloud, const GridSpec& grid) {
  RasterizeResult result{PolarRaster(grid), 0};
  std::vector<float> data(grid.n_rows() * grid.n_cols(), 0.0f);
  for (const auto& p : cloud) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
        (p.x == 0.0f && p.y == 0.0f && p.z == 0.0f)) {
      ++result.dropped;
      continue;
    }
    const auto s = to_spherical(p);
    const auto bin = bin_index(grid, s.theta, s.phi);
    const auto r = static_cast<float>(s.range);
    if (!bin || r > static_cast<float>(grid.max_range()) || r == 0.0f) {
      ++result.dropped;
      continue;
    }
    float& cell = data[bin->row * grid.n_cols() + bin->col];
    if (cell == 0.0f || r < cell) cell = r;
  }
  result.raster = PolarRaster(grid, std::move(data));
  return result;
}

namespace {

Point3 scaled(const std::array<double, 3>& u, double s) {
  return {static_cast<float>(s * u[0]), static_cast<float>(s * u[1]), static_cast<float>(s * u[2])};
}

// Float point along direction u whose norm rounds to exactly `range`, so that
// rasterizing it reproduces the stored value bit for bit. Rounding each
// coordinate is monotone in the scale, hence so is the rounded norm; bisect
// for the first scale that reaches `range`, then try single-ulp tweaks if
// that step overshot.
Point3 place_at_range(const std::array<double, 3>& u, float range) {
  auto rounded_norm = [](const Point3& p) { return static_cast<float>(norm_of(p)); };
  double lo = static_cast<double>(range) * (1.0 - 1e-5);
  double hi = static_cast<double>(range) * (1.0 + 1e-5);
  for (int i = 0; i < 80 && lo < hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (rounded_norm(scaled(u, mid)) >= range) hi = mid;
    else lo = mid;
  }
  Point3 p = scaled(u, hi);
  if (rounded_norm(p) == range) return p;
  for (int reach = 1; reach <= 3; ++reach) {
    for (int dx = -reach; dx <= reach; ++dx)
      for (int dy = -reach; dy <= reach; ++dy)
        for (int dz = -reach; dz <= reach; ++dz) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != reach) continue;
          Point3 q = p;
          auto step = [](float& c, int k) {
            for (int i = 0; i < std::abs(k); ++i) c = std::nextafter(c, k > 0 ? INFINITY : -INFINITY);
          };
          step(q.x, dx);
          step(q.y, dy);
          step(q.z, dz);
          if (rounded_norm(q) == range) return q;
        }
  }
  throw NumericError("could not place point at exact stored range");
}

}  // namespace

std::vector<Point3> derasterize(const PolarRaster& raster) {
  const auto& grid = raster.grid();
  std::vector<Point3> cloud;
  for (std::size_t row = 0; row < raster.rows(); ++row) {
    const double phi = grid.row_center(row) * kRadPerDeg;
    for (std::size_t col = 0; col < raster.cols(); ++col) {
      const float r = raster.at(row, col);
      if (r == 0.0f) continue;
      const double theta = grid.col_center(col) * kRadPerDeg;
      const std::array<double, 3> u{std::cos(phi) * std::cos(theta), std::cos(phi) * std::sin(theta), std::sin(phi)};
      cloud.push_back(place_at_range(u, r));
    }
  }
  return cloud;
}

}  // namespace lidarsynth
