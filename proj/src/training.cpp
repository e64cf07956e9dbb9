// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#include "lidarsynth/training.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "lidarsynth/error.hpp"
#include "lidarsynth/io.hpp"
#include "lidarsynth/ops.hpp"
#include "lidarsynth/parallel.hpp"
#include "lidarsynth/radar_dsp.hpp"
#include "lidarsynth/synthgen.hpp"

namespace lidarsynth {
namespace {

std::size_t input_numel(const EncoderConfig& e) { return e.channels * e.height * e.width; }

double range_scale(const Config& config) {
  return config.train.normalize_ranges ? 1.0 / config.model.grid.max_range() : 1.0;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<float> image_input(const TensorRecord& rec, const EncoderConfig& e, const std::string& what) {
  bool ok = false;
  if (rec.dims.size() == 2) ok = e.channels == 1 && rec.dims[0] == e.height && rec.dims[1] == e.width;
  if (rec.dims.size() == 3) ok = rec.dims[0] == e.channels && rec.dims[1] == e.height && rec.dims[2] == e.width;
  if (!ok) {
    throw FormatError(what + " has dims that do not match the configured " + std::to_string(e.channels) + "x" +
                      std::to_string(e.height) + "x" + std::to_string(e.width) + " input");
  }
  return rec.data;
}

void check_radar_input(const RadarMap& map, const EncoderConfig& e, const std::string& what) {
  if (e.channels != 1 || map.rows != e.height || map.cols != e.width) {
    throw FormatError(what + " map is " + std::to_string(map.rows) + "x" + std::to_string(map.cols) +
                      " but the encoder expects " + std::to_string(e.height) + "x" + std::to_string(e.width));
  }
}

std::string read_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open: " + path);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(line.substr(0, eq)) == "scenario") {
      auto value = trim(line.substr(eq + 1));
      if (value.empty()) break;
      return value;
    }
  }
  throw FormatError(path + " has no scenario entry");
}

// Forward machinery shared by training and evaluation. Embeddings of frozen
// encoders never change, so they are computed once per sample.
class Runner {
 public:
  Runner(LidarModel& model, const Config& config, const Dataset& data)
      : model_(model), config_(config), data_(data), scale_(range_scale(config)) {
    std::vector<std::size_t> all(data.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    for (auto m : kModalities) {
      if (!model.encoder_frozen(m)) continue;
      auto& cache = cache_[static_cast<std::size_t>(m)];
      cache.resize(data.size() * kEmbeddingDim);
      const std::size_t chunk = 32;
      for (std::size_t s = 0; s < all.size(); s += chunk) {
        const std::span<const std::size_t> idx(all.data() + s, std::min(chunk, all.size() - s));
        const Tensor emb = model_.encode(m, images(m, idx));
        std::copy(emb.values().begin(), emb.values().end(), cache.begin() + static_cast<std::ptrdiff_t>(s * kEmbeddingDim));
      }
    }
  }

  double scale() const { return scale_; }

  Tensor images(Modality m, std::span<const std::size_t> idx) const {
    const auto& e = config_.model.encoder(m);
    const std::size_t n = input_numel(e);
    std::vector<float> buf;
    buf.reserve(idx.size() * n);
    for (auto i : idx) {
      const auto& v = data_.samples[i].inputs[static_cast<std::size_t>(m)];
      buf.insert(buf.end(), v.begin(), v.end());
    }
    return Tensor::from({idx.size(), e.channels, e.height, e.width}, std::move(buf));
  }

  Tensor target(std::span<const std::size_t> idx) const {
    const auto& grid = config_.model.grid;
    std::vector<float> buf;
    buf.reserve(idx.size() * grid.n_rows() * grid.n_cols());
    for (auto i : idx)
      for (float v : data_.samples[i].target.data()) buf.push_back(static_cast<float>(v * scale_));
    return Tensor::from({idx.size(), 1, grid.n_rows(), grid.n_cols()}, std::move(buf));
  }

  Tensor forward(std::span<const std::size_t> idx, Mode mode, Rng& rng) {
    std::array<Tensor, kModalityCount> emb;
    for (auto m : kModalities) {
      const auto& cache = cache_[static_cast<std::size_t>(m)];
      if (cache.empty()) {
        emb[static_cast<std::size_t>(m)] = model_.encode(m, images(m, idx));
        continue;
      }
      std::vector<float> buf;
      buf.reserve(idx.size() * kEmbeddingDim);
      for (auto i : idx) {
        const auto first = cache.begin() + static_cast<std::ptrdiff_t>(i * kEmbeddingDim);
        buf.insert(buf.end(), first, first + static_cast<std::ptrdiff_t>(kEmbeddingDim));
      }
      emb[static_cast<std::size_t>(m)] = Tensor::from({idx.size(), kEmbeddingDim}, std::move(buf));
    }
    return model_.decode(model_.fuse(emb, mode, rng), mode);
  }

  // Eval-mode predictions in loss units, one flat raster per index.
  std::vector<std::vector<float>> predict(std::span<const std::size_t> idx) {
    std::vector<std::vector<float>> out;
    Rng rng(0);
    const std::size_t chunk = std::max<std::size_t>(1, config_.train.batch_size);
    for (std::size_t s = 0; s < idx.size(); s += chunk) {
      const auto part = idx.subspan(s, std::min(chunk, idx.size() - s));
      const Tensor pred = forward(part, Mode::eval, rng);
      const std::size_t per = pred.numel() / part.size();
      for (std::size_t b = 0; b < part.size(); ++b) {
        const auto first = pred.values().begin() + static_cast<std::ptrdiff_t>(b * per);
        out.emplace_back(first, first + static_cast<std::ptrdiff_t>(per));
      }
    }
    return out;
  }

  // Per-sample MMSE in square meters.
  std::vector<double> sample_mmse(std::span<const std::size_t> idx, std::span<const float> weights) {
    const auto preds = predict(idx);
    const std::size_t cols = config_.model.grid.n_cols();
    std::vector<double> out;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      std::vector<float> t;
      for (float v : data_.samples[idx[k]].target.data()) t.push_back(static_cast<float>(v * scale_));
      out.push_back(raster_mmse(preds[k], t, weights, cols) / (scale_ * scale_));
    }
    return out;
  }

 private:
  LidarModel& model_;
  const Config& config_;
  const Dataset& data_;
  double scale_;
  std::array<std::vector<float>, kModalityCount> cache_;
};

double mean(std::span<const double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

Sample make_sample(const SynthSample& synth, const Config& config) {
  Sample s{synth.scenario, {}, synth.target};
  s.inputs[static_cast<std::size_t>(Modality::camera)] = synth.camera.data;
  s.inputs[static_cast<std::size_t>(Modality::depth)] = synth.depth.data;
  const RadarCube rc = range_transform(synth.cube);
  RadarMap ra = range_angle_map(rc);
  RadarMap rv = range_velocity_map(rc);
  check_radar_input(ra, config.model.encoder(Modality::range_angle), "range-angle");
  check_radar_input(rv, config.model.encoder(Modality::range_velocity), "range-velocity");
  s.inputs[static_cast<std::size_t>(Modality::range_angle)] = std::move(ra.data);
  s.inputs[static_cast<std::size_t>(Modality::range_velocity)] = std::move(rv.data);
  return s;
}

Dataset load_dataset(const std::string& dir, const Config& config) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw FormatError("not a dataset directory: " + dir);
  std::vector<std::string> dirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_directory() && name.starts_with("sample_")) dirs.push_back(entry.path().string());
  }
  std::sort(dirs.begin(), dirs.end());

  std::vector<std::optional<Sample>> loaded(dirs.size());
  parallel_for(dirs.size(), [&](std::size_t i) {
    const std::string base = dirs[i] + "/";
    const auto& r = config.radar;
    auto cube_rec = load_lstf(base + "radar_cube.lstf");
    const std::vector<std::uint32_t> want{static_cast<std::uint32_t>(r.n_rx), static_cast<std::uint32_t>(r.n_samples),
                                          static_cast<std::uint32_t>(r.n_chirps), 2};
    if (cube_rec.dims != want) throw FormatError(base + "radar_cube.lstf does not match the configured radar dims");
    RadarCube cube = [&] {
      try {
        return RadarCube::from_interleaved(r.n_rx, r.n_samples, r.n_chirps, cube_rec.data);
      } catch (const InvalidArgument& e) {
        throw FormatError(base + "radar_cube.lstf: " + e.what());
      }
    }();
    const RadarCube rc = range_transform(cube);
    RadarMap ra = range_angle_map(rc);
    RadarMap rv = range_velocity_map(rc);
    check_radar_input(ra, config.model.encoder(Modality::range_angle), base + " range-angle");
    check_radar_input(rv, config.model.encoder(Modality::range_velocity), base + " range-velocity");

    Sample s{read_scenario(base + "meta.txt"), {}, load_raster(base + "target_raster.lstf", config.model.grid)};
    s.inputs[static_cast<std::size_t>(Modality::camera)] =
        image_input(load_lstf(base + "camera.lstf"), config.model.encoder(Modality::camera), base + "camera.lstf");
    s.inputs[static_cast<std::size_t>(Modality::depth)] =
        image_input(load_lstf(base + "depth.lstf"), config.model.encoder(Modality::depth), base + "depth.lstf");
    s.inputs[static_cast<std::size_t>(Modality::range_angle)] = std::move(ra.data);
    s.inputs[static_cast<std::size_t>(Modality::range_velocity)] = std::move(rv.data);
    loaded[i] = std::move(s);
  });
  Dataset data;
  for (auto& s : loaded) data.samples.push_back(std::move(*s));
  return data;
}

std::vector<float> weight_mask(const GridSpec& grid, double band_lo, double band_hi, double alpha) {
  if (!(band_lo < band_hi) || band_lo < grid.phi_lo() || band_hi > grid.phi_hi()) {
    throw InvalidArgument("loss band must be a non-empty interval inside the grid elevation span");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("band weight must be positive");
  std::vector<float> w(grid.n_rows(), 1.0f);
  for (std::size_t r = 0; r < grid.n_rows(); ++r) {
    const double c = grid.row_center(r);
    if (c >= band_lo && c < band_hi) w[r] = static_cast<float>(alpha);
  }
  return w;
}

std::vector<float> weight_mask(const GridSpec& grid, const TrainConfig& train) {
  return weight_mask(grid, train.band_lo, train.band_hi, train.band_weight);
}

Split split_dataset(std::span<const std::string> scenarios, const SplitSpec& spec) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    auto [it, inserted] = groups.try_emplace(scenarios[i]);
    if (inserted) order.push_back(scenarios[i]);
    it->second.push_back(i);
  }
  Split split;
  for (const auto& name : order) {
    const auto& g = groups[name];
    const auto n = static_cast<double>(g.size());
    const auto n_train = static_cast<std::size_t>(std::floor(spec.train * n + 1e-9));
    const auto n_val = std::min(g.size() - n_train, static_cast<std::size_t>(std::floor(spec.val * n + 1e-9)));
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (k < n_train) split.train.push_back(g[k]);
      else if (k < n_train + n_val) split.val.push_back(g[k]);
      else split.test.push_back(g[k]);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

Split split_dataset(const Dataset& data, const SplitSpec& spec) {
  std::vector<std::string> scenarios;
  for (const auto& s : data.samples) scenarios.push_back(s.scenario);
  return split_dataset(scenarios, spec);
}

double raster_mmse(std::span<const float> pred, std::span<const float> target, std::span<const float> row_weights,
                   std::size_t cols) {
  if (pred.size() != target.size() || cols == 0 || pred.size() != row_weights.size() * cols) {
    throw InvalidArgument("raster_mmse: prediction, target and row weights disagree in size");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = static_cast<double>(pred[i]) - static_cast<double>(target[i]);
    total += static_cast<double>(row_weights[i / cols]) * r * r;
  }
  return total / static_cast<double>(pred.size());
}

std::vector<std::size_t> batch_plan(std::size_t count, std::size_t batch_size) {
  if (batch_size < 2) throw InvalidArgument("batch_size must be >= 2");
  std::vector<std::size_t> sizes;
  for (std::size_t s = 0; s < count; s += batch_size) {
    const std::size_t n = std::min(batch_size, count - s);
    if (n >= 2) sizes.push_back(n);
  }
  return sizes;
}

TrainResult train(const Dataset& data, const Split& split, const Config& config, const TrainOptions& options) {
  const auto& tc = config.train;
  if (split.train.size() < 2) throw InvalidArgument("training needs at least 2 training samples");
  const auto weights = weight_mask(config.model.grid, tc);

  LidarModel model(config.model);
  Runner runner(model, config, data);
  const double to_report = 1.0 / (runner.scale() * runner.scale());

  std::mt19937_64 shuffle_rng(tc.seed);
  Rng dropout_rng(tc.seed ^ 0x5DEECE66DULL);
  TrainResult result;
  result.batch_sizes = batch_plan(split.train.size(), tc.batch_size);
  double best_score = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order = split.train;
  for (std::size_t epoch = 1; epoch <= tc.epochs; ++epoch) {
    const double lr = tc.lr_at(epoch);
    const AdamOptions adam{static_cast<float>(lr), static_cast<float>(tc.beta1), static_cast<float>(tc.beta2),
                           static_cast<float>(tc.eps)};
    order = split.train;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng() % i]);

    double loss_sum = 0.0;
    std::size_t seen = 0;
    std::size_t offset = 0;
    for (std::size_t b = 0; b < result.batch_sizes.size(); ++b) {
      const std::span<const std::size_t> idx(order.data() + offset, result.batch_sizes[b]);
      offset += idx.size();
      Tensor loss = mmse_loss(runner.forward(idx, Mode::train, dropout_rng), runner.target(idx), weights);
      const float value = loss.item();
      if (!std::isfinite(value)) {
        throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(b + 1));
      }
      loss.backward();
      adam_step(model.params(), adam);
      model.params().zero_grad();
      loss_sum += static_cast<double>(value) * static_cast<double>(idx.size());
      seen += idx.size();
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_mmse = loss_sum / static_cast<double>(seen) * to_report;
    rec.val_mmse = mean(runner.sample_mmse(split.val, weights));
    if (!std::isfinite(rec.train_mmse)) throw NumericError("training diverged at epoch " + std::to_string(epoch));
    result.history.push_back(rec);
    if (options.on_epoch) options.on_epoch(rec);

    const double score = split.val.empty() ? rec.train_mmse : rec.val_mmse;
    if (!std::isfinite(score)) throw NumericError("validation MMSE is not finite at epoch " + std::to_string(epoch));
    if (score < best_score) {
      best_score = score;
      result.best = model.params().clone();
      result.best_epoch = epoch;
    }
  }
  result.final = model.params().clone();
  if (result.best_epoch == 0) result.best = result.final.clone();
  return result;
}

std::vector<PolarRaster> predict(LidarModel& model, const Config& config, const Dataset& data,
                                 std::span<const std::size_t> indices) {
  Runner runner(model, config, data);
  const auto preds = runner.predict(indices);
  const double max_range = config.model.grid.max_range();
  std::vector<PolarRaster> out;
  for (const auto& p : preds) {
    std::vector<float> meters(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      meters[i] = static_cast<float>(std::clamp(p[i] / runner.scale(), 0.0, max_range));
    }
    out.emplace_back(config.model.grid, std::move(meters));
  }
  return out;
}

EvalReport evaluate(LidarModel& model, const Config& config, const Dataset& data, std::span<const std::size_t> indices) {
  const auto weights = weight_mask(config.model.grid, config.train);
  Runner runner(model, config, data);
  const auto scores = runner.sample_mmse(indices, weights);
  EvalReport report;
  std::map<std::string, std::size_t> slot;
  double total = 0.0;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto& name = data.samples[indices[k]].scenario;
    auto [it, inserted] = slot.try_emplace(name, report.scenarios.size());
    if (inserted) report.scenarios.push_back({name, 0, 0.0});
    auto& s = report.scenarios[it->second];
    s.mmse += scores[k];
    ++s.count;
    total += scores[k];
  }
  for (auto& s : report.scenarios) s.mmse /= static_cast<double>(s.count);
  report.overall = indices.empty() ? 0.0 : total / static_cast<double>(indices.size());
  report.baseline_zeros = baseline_all_zeros(data, indices, weights);
  return report;
}

double baseline_all_zeros(const Dataset& data, std::span<const std::size_t> indices, std::span<const float> row_weights) {
  if (indices.empty()) return 0.0;
  double total = 0.0;
  for (auto i : indices) {
    const auto& t = data.samples[i].target;
    const std::vector<float> zeros(t.data().size(), 0.0f);
    total += raster_mmse(zeros, t.data(), row_weights, t.cols());
  }
  return total / static_cast<double>(indices.size());
}

EvalReport ablation_no_fusion(const Dataset& data, const Split& split, const Config& config) {
  Config variant = config;
  variant.model.fusion.mode = FusionMode::none;
  auto result = train(data, split, variant);
  LidarModel model(variant.model, std::move(result.best));
  return evaluate(model, variant, data, split.test);
}

std::string EvalReport::to_text() const {
  std::string out;
  for (const auto& s : scenarios) out += s.scenario + "\t" + format_double(s.mmse) + "\n";
  out += "overall\t" + format_double(overall) + "\n";
  out += "baseline_zeros\t" + format_double(baseline_zeros) + "\n";
  if (ablation_no_fusion) out += "ablation_no_fusion\t" + format_double(*ablation_no_fusion) + "\n";
  return out;
}

std::string history_text(std::span<const EpochRecord> history) {
  std::string out = "# epoch\ttrain_mmse\tval_mmse\tlr\n";
  for (const auto& h : history) {
    out += std::to_string(h.epoch) + "\t" + format_double(h.train_mmse) + "\t" + format_double(h.val_mmse) + "\t" +
           format_double(h.lr) + "\n";
  }
  return out;
}

}  // namespace lidarsynth
