// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "lidarsynth/config.hpp"
#include "lidarsynth/ops.hpp"
#include "lidarsynth/optim.hpp"
#include "lidarsynth/tensor.hpp"

namespace lidarsynth {

/// Draws every parameter deterministically from `seed`: transpose-conv
/// kernels and all other weights ~ N(0, 0.02), batch-norm gains ~ N(1, 0.02),
/// biases 0, layer-norm gains 1, batch-norm running stats (0, 1).
/// Frozen encoders register their parameters as ParamKind::frozen.
ParamStore init_params(const ModelConfig& config, std::uint64_t seed);

/// Closed-form learnable scalar count (buffers excluded).
std::size_t encoder_param_count(const EncoderConfig& config);
std::size_t fusion_param_count(const FusionConfig& config);
std::size_t decoder_param_count(const DecoderConfig& config, std::size_t latent_dim);
std::size_t param_count(const ModelConfig& config);

/// Splits images [B, C, H, W] into flattened patches [B, P, C * p * p],
/// patches in row-major order, each patch laid out (c, y, x).
Tensor patchify(const Tensor& images, std::size_t patch_size);

/// Camera, depth and radar patch encoders, the multimodal fusion encoder and
/// the transpose-conv LiDAR decoder, backed by one ParamStore.
class LidarModel {
 public:
  /// Validates the config and initializes parameters from config.seed.
  explicit LidarModel(ModelConfig config);
  /// Adopts existing parameters; every expected name must be present with
  /// the expected shape.
  LidarModel(ModelConfig config, ParamStore params);

  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  /// images [B, C, H, W] -> embeddings [B, 768]; an unbatched [C, H, W] or
  /// [H, W] image yields [768].
  Tensor encode(Modality modality, const Tensor& images) const;

  /// Four [B, 768] embeddings in modality order -> latent [B, latent_dim].
  /// probs, when given, receives the attention of the last fusion layer.
  Tensor fuse(const std::array<Tensor, kModalityCount>& embeddings, Mode mode, Rng& rng,
              AttentionProbs* probs = nullptr);

  /// latent [B, latent_dim] -> non-negative raster batch [B, 1, n_rows, n_cols].
  Tensor decode(const Tensor& latent, Mode mode);

  /// encode x4 -> fuse -> decode.
  Tensor forward(const std::array<Tensor, kModalityCount>& images, Mode mode, Rng& rng);

  bool encoder_frozen(Modality m) const { return config_.encoder(m).frozen; }

 private:
  ModelConfig config_;
  ParamStore params_;
};

}  // namespace lidarsynth
