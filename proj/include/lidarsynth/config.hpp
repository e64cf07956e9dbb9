// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lidarsynth/geometry.hpp"

namespace lidarsynth {

/// The four input modalities, in fusion-slot order.
enum class Modality { camera = 0, depth = 1, range_angle = 2, range_velocity = 3 };
inline constexpr std::size_t kModalityCount = 4;
inline constexpr std::array<Modality, kModalityCount> kModalities{Modality::camera, Modality::depth,
                                                                  Modality::range_angle, Modality::range_velocity};
std::string_view modality_name(Modality m);

/// Width of every modality embedding handed to the fusion stage.
inline constexpr std::size_t kEmbeddingDim = 768;

struct EncoderConfig {
  std::size_t height = 224;
  std::size_t width = 224;
  std::size_t channels = 1;
  std::size_t patch_size = 16;
  std::size_t depth = 1;      // encoder layers
  std::size_t n_heads = 12;
  std::size_t d_model = 768;  // internal width; output is always kEmbeddingDim
  std::size_t ffn_dim = 3072;
  bool frozen = true;

  std::size_t patch_count() const { return (height / patch_size) * (width / patch_size); }
  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

enum class FusionMode { transformer, none };

struct FusionConfig {
  FusionMode mode = FusionMode::transformer;
  std::size_t d_model = kEmbeddingDim;
  std::size_t n_heads = 12;
  std::size_t ffn_dim = 2048;
  double dropout = 0.1;
  std::size_t n_layers = 1;
  std::size_t latent_dim = 1024;

  friend bool operator==(const FusionConfig&, const FusionConfig&) = default;
};

struct DecoderConfig {
  std::size_t seed_theta = 45;  // seed columns (azimuth direction)
  std::size_t seed_phi = 34;    // seed rows (elevation direction)
  std::vector<std::size_t> filters{256, 128, 64, 64};
  std::size_t kernel = 4;
  std::size_t stride = 2;
  std::size_t padding = 1;

  /// Spatial extent after all transpose-conv layers (filters.size() + 1 of them).
  std::size_t output_theta() const;
  std::size_t output_phi() const;
  friend bool operator==(const DecoderConfig&, const DecoderConfig&) = default;
};

struct RadarConfig {
  std::size_t n_rx = 4;
  std::size_t n_samples = 256;
  std::size_t n_chirps = 128;
  double r_max = 50.0;  // range mapped to normalized frequency 1
  double v_max = 20.0;  // radial speed mapped to normalized frequency 1

  friend bool operator==(const RadarConfig&, const RadarConfig&) = default;
};

struct ModelConfig {
  std::array<EncoderConfig, kModalityCount> encoders;
  FusionConfig fusion;
  DecoderConfig decoder;
  GridSpec grid = GridSpec::full_scale();
  std::uint64_t seed = 1;

  const EncoderConfig& encoder(Modality m) const { return encoders[static_cast<std::size_t>(m)]; }
  EncoderConfig& encoder(Modality m) { return encoders[static_cast<std::size_t>(m)]; }
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct LrPhase {
  std::size_t first_epoch = 1;
  double lr = 1e-3;
  friend bool operator==(const LrPhase&, const LrPhase&) = default;
};

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t epochs = 20;
  std::vector<LrPhase> lr_schedule{{1, 1e-3}, {11, 1e-4}};
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 7;
  double band_lo = -1.71875;
  double band_hi = 2.1875;
  double band_weight = 10.0;
  bool normalize_ranges = false;  // divide ranges by grid.max_range for the loss

  /// Learning rate in effect for a 1-based epoch.
  double lr_at(std::size_t epoch) const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct SplitSpec {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

struct SynthConfig {
  double camera_fov = 90.0;    // horizontal field of view, degrees
  double sensor_height = 1.7;  // meters above the ground plane
  double depth_near = 1.0;     // depth (m) that maps to inverse-depth value 1
  double world_radius = 40.0;
  friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

/// Checks encoder, fusion and decoder settings and that the decoder output
/// matches the grid. Throws InvalidArgument.
void validate_model(const ModelConfig& model);

/// Everything a run needs, loadable from the `key = value` text format.
struct Config {
  ModelConfig model;
  RadarConfig radar;
  TrainConfig train;
  SplitSpec split;
  SynthConfig synth;

  /// Full-size architecture: 1088 x 1440 grid, 224 x 224 images.
  static Config full_scale();
  /// Desk-scale profile: 128 x 192 grid, 64 x 64 images, small encoders,
  /// decoder filters {8, 8, 4, 4}.
  static Config toy();

  /// Throws InvalidArgument describing the first violated constraint.
  void validate() const;

  friend bool operator==(const Config&, const Config&) = default;
};

/// Parses config text over the full-scale defaults. Unknown keys, duplicate keys
/// and malformed values raise FormatError; the result is validated.
Config parse_config(std::string_view text, const Config& base = Config::full_scale());
Config load_config(const std::string& path, const Config& base = Config::full_scale());

/// Reads only the grid from config text. Other keys must still be
/// recognized but are not validated, so a grid-only file is enough.
GridSpec parse_grid(std::string_view text, const Config& base = Config::full_scale());
GridSpec load_grid(const std::string& path, const Config& base = Config::full_scale());

/// Canonical text listing every key; parse_config(to_text(c)) == c.
std::string to_text(const Config& config);
/// Canonical text of the keys that define the model (grid, radar, encoders,
/// fusion, decoder, model seed); used to match checkpoints to configs.
std::string model_signature(const Config& config);

/// All recognized keys with a one-line description, in canonical order.
std::vector<std::pair<std::string, std::string>> config_key_docs();

}  // namespace lidarsynth
