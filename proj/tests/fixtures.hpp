// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "lidarsynth/config.hpp"

namespace fixtures {

// Smallest useful pipeline: 8 x 12 grid from a 3 x 2 seed and one hidden
// transpose-conv layer, 8 x 8 images, 4 x 8 x 8 radar cubes.
inline lidarsynth::Config tiny_config() {
  using namespace lidarsynth;
  Config c = Config::toy();
  c.model.grid = GridSpec(-180.0, 180.0, 30.0, {{-30.0, -2.0, 14.0}, {-2.0, 2.0, 1.0}, {2.0, 30.0, 14.0}}, 50.0);
  c.radar = {4, 8, 8, 50.0, 20.0};
  for (auto& e : c.model.encoders) {
    e.height = 8;
    e.width = 8;
    e.patch_size = 4;
    e.d_model = 16;
    e.n_heads = 2;
    e.ffn_dim = 32;
  }
  c.model.encoder(Modality::range_angle).height = 4;
  c.model.fusion.ffn_dim = 64;
  c.model.fusion.latent_dim = 32;
  c.model.decoder.seed_theta = 3;
  c.model.decoder.seed_phi = 2;
  c.model.decoder.filters = {2};
  c.train.band_lo = -1.71875;
  c.train.band_hi = 2.1875;
  c.train.batch_size = 4;
  c.train.epochs = 3;
  c.train.lr_schedule = {{1, 1e-3}, {3, 1e-4}};
  c.synth.world_radius = 30.0;
  c.validate();
  return c;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("lidarsynth_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::string str() const { return path_.string(); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
