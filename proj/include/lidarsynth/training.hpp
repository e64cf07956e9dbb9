// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lidarsynth/config.hpp"
#include "lidarsynth/geometry.hpp"
#include "lidarsynth/model.hpp"
#include "lidarsynth/optim.hpp"

namespace lidarsynth {

struct SynthSample;

/// One training example: the four model inputs, each laid out [C, H, W] to
/// match its encoder config, and the target raster on the model grid.
struct Sample {
  std::string scenario;
  std::array<std::vector<float>, kModalityCount> inputs;
  PolarRaster target;
};

struct Dataset {
  std::vector<Sample> samples;
  std::size_t size() const { return samples.size(); }
};

/// Builds a Sample from a generated one, computing the radar maps.
Sample make_sample(const SynthSample& synth, const Config& config);

/// Reads every sample_* directory under `dir` in name order. Dimension
/// mismatches with `config` raise FormatError.
Dataset load_dataset(const std::string& dir, const Config& config);

/// Weight alpha for rows whose elevation bin center lies in [band_lo,
/// band_hi), 1 elsewhere. Throws InvalidArgument if the band leaves the grid.
std::vector<float> weight_mask(const GridSpec& grid, double band_lo, double band_hi, double alpha);
std::vector<float> weight_mask(const GridSpec& grid, const TrainConfig& train);

/// Sample indices of each split.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Within each scenario (in order of first appearance) the first
/// floor(train * n) samples go to train, the next floor(val * n) to val, the
/// rest to test. Original order is preserved inside every split.
Split split_dataset(std::span<const std::string> scenarios, const SplitSpec& spec);
Split split_dataset(const Dataset& data, const SplitSpec& spec);

/// Weighted squared error of one raster, averaged over its pixels.
double raster_mmse(std::span<const float> pred, std::span<const float> target, std::span<const float> row_weights,
                   std::size_t cols);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_mmse = 0.0;
  double val_mmse = 0.0;  // NaN when the validation split is empty
  double lr = 0.0;
};

struct TrainResult {
  ParamStore best;  // parameters after the epoch with the lowest validation MMSE
  std::size_t best_epoch = 0;
  ParamStore final;
  std::vector<EpochRecord> history;
  std::vector<std::size_t> batch_sizes;  // batch sizes of one epoch
};

struct TrainOptions {
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Mini-batch Adam on the weighted loss. MMSE values are reported in square
/// meters even when the loss is computed on normalized ranges. A non-finite
/// loss throws NumericError.
TrainResult train(const Dataset& data, const Split& split, const Config& config, const TrainOptions& options = {});

/// Splits the batch into consecutive chunks of `batch_size`; a final chunk
/// smaller than 2 is dropped.
std::vector<std::size_t> batch_plan(std::size_t count, std::size_t batch_size);

struct ScenarioScore {
  std::string scenario;
  std::size_t count = 0;
  double mmse = 0.0;
};

struct EvalReport {
  std::vector<ScenarioScore> scenarios;
  double overall = 0.0;
  double baseline_zeros = 0.0;
  std::optional<double> ablation_no_fusion;
  std::string to_text() const;
};

/// Eval-mode predictions in meters, one raster per index.
std::vector<PolarRaster> predict(LidarModel& model, const Config& config, const Dataset& data,
                                 std::span<const std::size_t> indices);

EvalReport evaluate(LidarModel& model, const Config& config, const Dataset& data, std::span<const std::size_t> indices);

/// Mean MMSE of an all-zero prediction over `indices`.
double baseline_all_zeros(const Dataset& data, std::span<const std::size_t> indices, std::span<const float> row_weights);

/// Trains and evaluates the variant whose fusion stage is a plain linear
/// projection of the concatenated embeddings.
EvalReport ablation_no_fusion(const Dataset& data, const Split& split, const Config& config);

std::string history_text(std::span<const EpochRecord> history);

}  // namespace lidarsynth
