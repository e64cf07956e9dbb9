// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lidarsynth/config.hpp"
#include "lidarsynth/geometry.hpp"
#include "lidarsynth/image.hpp"
#include "lidarsynth/radar_dsp.hpp"

namespace lidarsynth {

enum class PrimitiveKind { box, cylinder };

/// Axis-aligned box (size = full extents along x, y, z) or vertical
/// cylinder (size.x = diameter, size.z = height). Meters, sensor frame:
/// x forward, y left, z up, sensor at the origin.
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::box;
  Point3 center;
  Point3 size{1.0f, 1.0f, 1.0f};
  float reflectivity = 1.0f;
  float radial_velocity = 0.0f;  // m/s, positive away from the sensor
  friend bool operator==(const Primitive&, const Primitive&) = default;
};

struct Scene {
  std::optional<float> ground_z;  // height of the ground plane; none = no ground
  std::vector<Primitive> primitives;
  float brightness = 1.0f;
  float noise_sigma = 0.0f;  // radar noise level
  friend bool operator==(const Scene&, const Scene&) = default;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Distribution bundle for one scenario.
struct SceneProfile {
  std::string name;
  std::size_t min_primitives = 0;
  std::size_t max_primitives = 0;
  Range distance{6.0, 30.0};     // primitive center distance from the sensor
  Range azimuth{-80.0, 80.0};    // degrees
  Range box_footprint{0.8, 4.0};
  Range box_height{1.0, 3.5};
  Range cylinder_radius{0.2, 1.0};
  Range cylinder_height{2.0, 6.0};
  Range reflectivity{0.2, 1.0};
  Range speed{-8.0, 8.0};
  Range brightness{0.7, 1.0};
  double noise_sigma = 0.05;
  double cylinder_fraction = 0.3;
  bool ground = true;
};

/// day_sparse, day_dense, night_sparse, night_dense, then ground_only.
const std::vector<SceneProfile>& scene_profiles();
/// Throws InvalidArgument for unknown names.
const SceneProfile& scene_profile(std::string_view name);
/// The four scenario profiles used by "mixed" datasets, in round-robin order.
std::vector<std::string> mixed_profile_names();

Scene generate_scene(std::uint64_t seed, const SceneProfile& profile, const SynthConfig& synth = {});

/// Distance along a unit direction from `origin` to the nearest surface, if any.
std::optional<double> cast_ray(const Scene& scene, const Point3& origin, const Point3& direction);

/// Nearest hit along every bin-center direction; 0 beyond max_range or on a miss.
PolarRaster raycast_lidar(const Scene& scene, const GridSpec& grid);

/// Pinhole view along +x with horizontal field of view `fov_deg`. Shade is
/// reflectivity * brightness / (1 + (d / 20)^2); misses get 0.5 * brightness.
Image render_camera(const Scene& scene, std::size_t width, std::size_t height, double fov_deg = 90.0);
/// Same camera; value depth_near / z_depth clamped to [0, 1], 0 on a miss.
Image render_depth(const Scene& scene, std::size_t width, std::size_t height, double fov_deg = 90.0,
                   double depth_near = 1.0);

/// Sum over primitives in front of the sensor (|azimuth| < 90 deg, range <
/// r_max) of A exp(2 pi i (f_r n + f_a k + f_v m)) with f_r = r / r_max,
/// f_a = 0.5 sin(azimuth), f_v = v / v_max, plus circular Gaussian noise.
RadarCube simulate_radar(const Scene& scene, const RadarConfig& radar, double noise_sigma, std::uint64_t seed);

/// Per-sample seed for index `index` of a dataset generated from `base_seed`.
std::uint64_t sample_seed(std::uint64_t base_seed, std::size_t index);

struct SynthSample {
  std::string scenario;
  std::uint64_t seed = 0;
  Scene scene;
  Image camera;
  Image depth;
  RadarCube cube;
  PolarRaster target;
};

SynthSample generate_sample(const Config& config, const SceneProfile& profile, std::uint64_t seed);

/// Writes camera.lstf, depth.lstf, radar_cube.lstf, target_raster.lstf and
/// meta.txt into `dir` (created if needed).
void export_sample(const SynthSample& sample, const std::string& dir);

/// Writes `count` sample_%06d directories under `out_dir`. `profile` is a
/// profile name or "mixed".
void synthesize_dataset(const Config& config, const std::string& out_dir, std::size_t count,
                        const std::string& profile, std::uint64_t seed);

}  // namespace lidarsynth
