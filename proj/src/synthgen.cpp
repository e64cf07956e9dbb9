// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#include "lidarsynth/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "lidarsynth/error.hpp"
#include "lidarsynth/io.hpp"
#include "lidarsynth/parallel.hpp"

namespace lidarsynth {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kHitEps = 1e-9;
constexpr float kGroundReflectivity = 0.3f;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Small portable generator so scenes do not depend on the standard
// library's distribution implementations.
class SceneRng {
 public:
  explicit SceneRng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t bits() { return splitmix64(state_); }
  double uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }
  double uniform(const Range& r) { return r.lo + (r.hi - r.lo) * uniform(); }
  std::size_t integer(std::size_t lo, std::size_t hi) {  // inclusive
    return lo + static_cast<std::size_t>(bits() % (hi - lo + 1));
  }
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

struct Vec {
  double x, y, z;
};

Vec vec(const Point3& p) { return {p.x, p.y, p.z}; }

std::optional<double> hit_box(const Primitive& b, const Vec& o, const Vec& d) {
  const std::array<double, 3> oc{o.x, o.y, o.z};
  const std::array<double, 3> dc{d.x, d.y, d.z};
  const std::array<double, 3> lo{b.center.x - 0.5 * b.size.x, b.center.y - 0.5 * b.size.y, b.center.z - 0.5 * b.size.z};
  const std::array<double, 3> hi{b.center.x + 0.5 * b.size.x, b.center.y + 0.5 * b.size.y, b.center.z + 0.5 * b.size.z};
  double t_near = -INFINITY;
  double t_far = INFINITY;
  for (int a = 0; a < 3; ++a) {
    if (dc[a] == 0.0) {
      if (oc[a] < lo[a] || oc[a] > hi[a]) return std::nullopt;
      continue;
    }
    double t0 = (lo[a] - oc[a]) / dc[a];
    double t1 = (hi[a] - oc[a]) / dc[a];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
  }
  if (t_near > t_far) return std::nullopt;
  if (t_near > kHitEps) return t_near;
  if (t_far > kHitEps) return t_far;
  return std::nullopt;
}

std::optional<double> hit_cylinder(const Primitive& c, const Vec& o, const Vec& d) {
  const double r = 0.5 * c.size.x;
  const double z_lo = c.center.z - 0.5 * c.size.z;
  const double z_hi = c.center.z + 0.5 * c.size.z;
  const double ox = o.x - c.center.x;
  const double oy = o.y - c.center.y;
  std::optional<double> best;
  auto consider = [&](double t) {
    if (t > kHitEps && (!best || t < *best)) best = t;
  };
  const double a = d.x * d.x + d.y * d.y;
  if (a > 0.0) {
    const double b = ox * d.x + oy * d.y;
    const double cc = ox * ox + oy * oy - r * r;
    const double disc = b * b - a * cc;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      for (double t : {(-b - s) / a, (-b + s) / a}) {
        const double z = o.z + t * d.z;
        if (z >= z_lo && z <= z_hi) consider(t);
      }
    }
  }
  if (d.z != 0.0) {
    for (double zc : {z_lo, z_hi}) {
      const double t = (zc - o.z) / d.z;
      const double x = ox + t * d.x;
      const double y = oy + t * d.y;
      if (x * x + y * y <= r * r) consider(t);
    }
  }
  return best;
}

struct Hit {
  double t;
  float reflectivity;
};

std::optional<Hit> nearest_hit(const Scene& scene, const Vec& o, const Vec& d) {
  std::optional<Hit> best;
  if (scene.ground_z && d.z != 0.0) {
    const double t = (*scene.ground_z - o.z) / d.z;
    if (t > kHitEps) best = Hit{t, kGroundReflectivity};
  }
  for (const auto& p : scene.primitives) {
    const auto t = p.kind == PrimitiveKind::box ? hit_box(p, o, d) : hit_cylinder(p, o, d);
    if (t && (!best || *t < best->t)) best = Hit{*t, p.reflectivity};
  }
  return best;
}

// Unit ray through pixel (row, col) of a pinhole camera looking along +x.
Vec pixel_ray(std::size_t row, std::size_t col, std::size_t width, std::size_t height, double focal) {
  const double u = (static_cast<double>(col) + 0.5) - 0.5 * static_cast<double>(width);
  const double v = (static_cast<double>(row) + 0.5) - 0.5 * static_cast<double>(height);
  Vec d{focal, -u, -v};
  const double n = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
  return {d.x / n, d.y / n, d.z / n};
}

double focal_length(std::size_t width, double fov_deg) {
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw InvalidArgument("camera field of view must be in (0, 180)");
  return 0.5 * static_cast<double>(width) / std::tan(0.5 * fov_deg * kDeg);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open for writing: " + path);
  out << text;
  if (!out) throw FormatError("write failed: " + path);
}

std::vector<std::uint32_t> image_dims(const Image& img) {
  return {static_cast<std::uint32_t>(img.height), static_cast<std::uint32_t>(img.width)};
}

}  // namespace

const std::vector<SceneProfile>& scene_profiles() {
  static const std::vector<SceneProfile> profiles = [] {
    SceneProfile day_sparse;
    day_sparse.name = "day_sparse";
    day_sparse.min_primitives = 2;
    day_sparse.max_primitives = 4;

    SceneProfile day_dense = day_sparse;
    day_dense.name = "day_dense";
    day_dense.min_primitives = 6;
    day_dense.max_primitives = 10;

    SceneProfile night_sparse = day_sparse;
    night_sparse.name = "night_sparse";
    night_sparse.brightness = {0.05, 0.25};
    night_sparse.noise_sigma = 0.1;

    SceneProfile night_dense = day_dense;
    night_dense.name = "night_dense";
    night_dense.brightness = {0.05, 0.25};
    night_dense.noise_sigma = 0.1;

    SceneProfile ground_only = day_sparse;
    ground_only.name = "ground_only";
    ground_only.min_primitives = 0;
    ground_only.max_primitives = 0;
    return std::vector<SceneProfile>{day_sparse, day_dense, night_sparse, night_dense, ground_only};
  }();
  return profiles;
}

const SceneProfile& scene_profile(std::string_view name) {
  for (const auto& p : scene_profiles())
    if (p.name == name) return p;
  throw InvalidArgument("unknown scene profile '" + std::string(name) + "'");
}

std::vector<std::string> mixed_profile_names() { return {"day_sparse", "day_dense", "night_sparse", "night_dense"}; }

Scene generate_scene(std::uint64_t seed, const SceneProfile& profile, const SynthConfig& synth) {
  if (profile.min_primitives > profile.max_primitives) throw InvalidArgument("profile primitive range is empty");
  SceneRng rng(seed);
  Scene scene;
  if (profile.ground) scene.ground_z = static_cast<float>(-synth.sensor_height);
  const float base = scene.ground_z.value_or(static_cast<float>(-synth.sensor_height));
  scene.brightness = static_cast<float>(rng.uniform(profile.brightness));
  scene.noise_sigma = static_cast<float>(profile.noise_sigma);

  const std::size_t n = rng.integer(profile.min_primitives, profile.max_primitives);
  for (std::size_t i = 0; i < n; ++i) {
    Primitive p;
    const bool cylinder = rng.uniform() < profile.cylinder_fraction;
    p.kind = cylinder ? PrimitiveKind::cylinder : PrimitiveKind::box;
    if (cylinder) {
      const double r = rng.uniform(profile.cylinder_radius);
      p.size = {static_cast<float>(2 * r), static_cast<float>(2 * r), static_cast<float>(rng.uniform(profile.cylinder_height))};
    } else {
      p.size = {static_cast<float>(rng.uniform(profile.box_footprint)), static_cast<float>(rng.uniform(profile.box_footprint)),
                static_cast<float>(rng.uniform(profile.box_height))};
    }
    const double half_extent = 0.5 * std::hypot(p.size.x, p.size.y);
    const double dist = std::min(rng.uniform(profile.distance), synth.world_radius - half_extent);
    const double az = rng.uniform(profile.azimuth) * kDeg;
    p.center = {static_cast<float>(dist * std::cos(az)), static_cast<float>(dist * std::sin(az)), base + 0.5f * p.size.z};
    p.reflectivity = static_cast<float>(rng.uniform(profile.reflectivity));
    p.radial_velocity = static_cast<float>(rng.uniform(profile.speed));
    scene.primitives.push_back(p);
  }
  return scene;
}

std::optional<double> cast_ray(const Scene& scene, const Point3& origin, const Point3& direction) {
  const auto hit = nearest_hit(scene, vec(origin), vec(direction));
  if (!hit) return std::nullopt;
  return hit->t;
}

PolarRaster raycast_lidar(const Scene& scene, const GridSpec& grid) {
  std::vector<float> data(grid.n_rows() * grid.n_cols(), 0.0f);
  const double max_range = grid.max_range();
  parallel_for(grid.n_rows(), [&](std::size_t row) {
    const double phi = grid.row_center(row) * kDeg;
    for (std::size_t col = 0; col < grid.n_cols(); ++col) {
      const double theta = grid.col_center(col) * kDeg;
      const Vec d{std::cos(phi) * std::cos(theta), std::cos(phi) * std::sin(theta), std::sin(phi)};
      const auto hit = nearest_hit(scene, {0.0, 0.0, 0.0}, d);
      if (hit && hit->t <= max_range) {
        data[row * grid.n_cols() + col] = std::min(static_cast<float>(hit->t), static_cast<float>(max_range));
      }
    }
  });
  return PolarRaster(grid, std::move(data));
}

Image render_camera(const Scene& scene, std::size_t width, std::size_t height, double fov_deg) {
  const double f = focal_length(width, fov_deg);
  Image img(height, width);
  const double background = 0.5 * scene.brightness;
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const auto hit = nearest_hit(scene, {0.0, 0.0, 0.0}, pixel_ray(r, c, width, height, f));
      double shade = background;
      if (hit) {
        const double falloff = 1.0 + (hit->t / 20.0) * (hit->t / 20.0);
        shade = hit->reflectivity * scene.brightness / falloff;
      }
      img.at(r, c) = static_cast<float>(shade);
    }
  }
  return img;
}

Image render_depth(const Scene& scene, std::size_t width, std::size_t height, double fov_deg, double depth_near) {
  const double f = focal_length(width, fov_deg);
  Image img(height, width);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const Vec d = pixel_ray(r, c, width, height, f);
      const auto hit = nearest_hit(scene, {0.0, 0.0, 0.0}, d);
      if (!hit) continue;
      const double z = hit->t * d.x;
      img.at(r, c) = static_cast<float>(std::clamp(depth_near / z, 0.0, 1.0));
    }
  }
  return img;
}

RadarCube simulate_radar(const Scene& scene, const RadarConfig& radar, double noise_sigma, std::uint64_t seed) {
  const std::size_t K = radar.n_rx;
  const std::size_t N = radar.n_samples;
  const std::size_t M = radar.n_chirps;
  if (K == 0 || N == 0 || M == 0) throw InvalidArgument("radar dims must be >= 1");
  std::vector<std::complex<double>> acc(K * N * M);
  std::vector<std::complex<double>> pk(K), pn(N), pm(M);
  auto phasors = [](std::vector<std::complex<double>>& out, double freq) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::polar(1.0, 2.0 * std::numbers::pi * freq * static_cast<double>(i));
  };
  for (const auto& p : scene.primitives) {
    const double r = std::sqrt(double(p.center.x) * p.center.x + double(p.center.y) * p.center.y + double(p.center.z) * p.center.z);
    const double az = std::atan2(static_cast<double>(p.center.y), static_cast<double>(p.center.x));
    if (std::abs(az) >= 0.5 * std::numbers::pi || r >= radar.r_max) continue;
    phasors(pk, 0.5 * std::sin(az));
    phasors(pn, r / radar.r_max);
    phasors(pm, p.radial_velocity / radar.v_max);
    const double amp = p.reflectivity;
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t n = 0; n < N; ++n) {
        const auto kn = amp * pk[k] * pn[n];
        auto* row = &acc[(k * N + n) * M];
        for (std::size_t m = 0; m < M; ++m) row[m] += kn * pm[m];
      }
  }
  std::vector<cfloat> data(acc.size());
  SceneRng rng(seed);
  const double s = noise_sigma / std::sqrt(2.0);
  for (std::size_t i = 0; i < acc.size(); ++i) {
    auto v = acc[i];
    if (noise_sigma > 0.0) {
      const double re = rng.normal();
      const double im = rng.normal();
      v += std::complex<double>(s * re, s * im);
    }
    data[i] = cfloat(static_cast<float>(v.real()), static_cast<float>(v.imag()));
  }
  return RadarCube(K, N, M, std::move(data));
}

std::uint64_t sample_seed(std::uint64_t base_seed, std::size_t index) {
  std::uint64_t state = base_seed ^ (0xD1B54A32D192ED03ULL * (static_cast<std::uint64_t>(index) + 1));
  return splitmix64(state);
}

SynthSample generate_sample(const Config& config, const SceneProfile& profile, std::uint64_t seed) {
  Scene scene = generate_scene(seed, profile, config.synth);
  const auto& cam = config.model.encoder(Modality::camera);
  const auto& dep = config.model.encoder(Modality::depth);
  Image camera = render_camera(scene, cam.width, cam.height, config.synth.camera_fov);
  Image depth = render_depth(scene, dep.width, dep.height, config.synth.camera_fov, config.synth.depth_near);
  std::uint64_t noise_state = seed;
  const std::uint64_t noise_seed = splitmix64(noise_state);
  RadarCube cube = simulate_radar(scene, config.radar, scene.noise_sigma, noise_seed);
  PolarRaster target = raycast_lidar(scene, config.model.grid);
  return SynthSample{profile.name, seed, std::move(scene), std::move(camera), std::move(depth), std::move(cube), std::move(target)};
}

void export_sample(const SynthSample& sample, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string base = dir + "/";
  save_lstf(base + "camera.lstf", image_dims(sample.camera), sample.camera.data);
  save_lstf(base + "depth.lstf", image_dims(sample.depth), sample.depth.data);
  const std::vector<std::uint32_t> cube_dims{static_cast<std::uint32_t>(sample.cube.n_rx()),
                                             static_cast<std::uint32_t>(sample.cube.n_samples()),
                                             static_cast<std::uint32_t>(sample.cube.n_chirps()), 2};
  save_lstf(base + "radar_cube.lstf", cube_dims, sample.cube.interleaved());
  save_raster(base + "target_raster.lstf", sample.target);
  write_text(base + "meta.txt", "scenario = " + sample.scenario + "\nseed = " + std::to_string(sample.seed) + "\n");
}

void synthesize_dataset(const Config& config, const std::string& out_dir, std::size_t count, const std::string& profile,
                        std::uint64_t seed) {
  std::vector<std::string> names;
  if (profile == "mixed") names = mixed_profile_names();
  else names.push_back(scene_profile(profile).name);
  std::filesystem::create_directories(out_dir);
  parallel_for(count, [&](std::size_t i) {
    const auto& prof = scene_profile(names[i % names.size()]);
    char name[32];
    std::snprintf(name, sizeof(name), "sample_%06zu", i);
    export_sample(generate_sample(config, prof, sample_seed(seed, i)), out_dir + "/" + name);
  });
}

}  // namespace lidarsynth
