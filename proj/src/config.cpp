// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#include "lidarsynth/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "lidarsynth/error.hpp"

namespace lidarsynth {

std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::camera: return "camera";
    case Modality::depth: return "depth";
    case Modality::range_angle: return "range_angle";
    case Modality::range_velocity: return "range_velocity";
  }
  return "unknown";
}

namespace {

std::size_t run_extent(std::size_t seed, const DecoderConfig& d) {
  std::size_t extent = seed;
  for (std::size_t i = 0; i < d.filters.size() + 1; ++i) {
    const long long next = (static_cast<long long>(extent) - 1) * static_cast<long long>(d.stride) -
                           2 * static_cast<long long>(d.padding) + static_cast<long long>(d.kernel);
    if (next <= 0) return 0;
    extent = static_cast<std::size_t>(next);
  }
  return extent;
}

}  // namespace

std::size_t DecoderConfig::output_theta() const { return run_extent(seed_theta, *this); }
std::size_t DecoderConfig::output_phi() const { return run_extent(seed_phi, *this); }

double TrainConfig::lr_at(std::size_t epoch) const {
  double lr = lr_schedule.empty() ? 0.0 : lr_schedule.front().lr;
  for (const auto& phase : lr_schedule)
    if (epoch >= phase.first_epoch) lr = phase.lr;
  return lr;
}

Config Config::full_scale() {
  Config c;
  auto& enc = c.model.encoders;
  enc[0] = EncoderConfig{};
  enc[1] = EncoderConfig{};
  enc[2] = EncoderConfig{};
  enc[2].height = c.radar.n_rx;
  enc[2].width = c.radar.n_samples;
  enc[2].patch_size = 4;
  enc[3] = EncoderConfig{};
  enc[3].height = c.radar.n_chirps;
  enc[3].width = c.radar.n_samples;
  return c;
}

Config Config::toy() {
  Config c = full_scale();
  c.model.grid = GridSpec(-180.0, 180.0, 1.875, {{-60.0, -4.0, 1.75}, {-4.0, 4.0, 0.125}, {4.0, 60.0, 1.75}}, 100.0);
  c.radar.n_rx = 8;
  c.radar.n_samples = 64;
  c.radar.n_chirps = 64;
  for (auto& e : c.model.encoders) {
    e.height = 64;
    e.width = 64;
    e.patch_size = 16;
    e.d_model = 256;
    e.n_heads = 8;
    e.ffn_dim = 512;
    e.depth = 1;
  }
  c.model.encoder(Modality::range_angle).height = c.radar.n_rx;
  c.model.encoder(Modality::range_angle).patch_size = 8;
  c.model.decoder.seed_theta = 6;
  c.model.decoder.seed_phi = 4;
  c.model.decoder.filters = {8, 8, 4, 4};
  c.train.normalize_ranges = true;
  return c;
}

void validate_model(const ModelConfig& model) {
  auto fail = [](const std::string& msg) { throw InvalidArgument("invalid model config: " + msg); };
  for (auto m : kModalities) {
    const auto& e = model.encoder(m);
    const std::string name(modality_name(m));
    if (e.patch_size == 0 || e.height == 0 || e.width == 0 || e.channels == 0) fail(name + " encoder dims must be positive");
    if (e.height % e.patch_size || e.width % e.patch_size) fail(name + " image size not divisible by patch size");
    if (e.n_heads == 0 || e.d_model % e.n_heads) fail(name + " encoder width not divisible by heads");
    if (e.ffn_dim == 0) fail(name + " encoder ffn_dim must be positive");
  }
  const auto& f = model.fusion;
  if (f.d_model != kEmbeddingDim) fail("fusion.d_model must equal the 768-wide modality embedding");
  if (f.n_heads == 0 || f.d_model % f.n_heads) fail("fusion width not divisible by heads");
  if (f.ffn_dim == 0 || f.latent_dim == 0) fail("fusion ffn_dim and latent_dim must be positive");
  if (f.mode == FusionMode::transformer && f.n_layers == 0) fail("fusion needs at least one encoder layer");
  if (!(f.dropout >= 0.0 && f.dropout < 1.0)) fail("fusion.dropout must be in [0, 1)");

  const auto& d = model.decoder;
  if (d.seed_theta == 0 || d.seed_phi == 0) fail("decoder seed dims must be positive");
  for (auto l : d.filters)
    if (l == 0) fail("decoder filters must be >= 1");
  if (d.kernel == 0 || d.stride == 0) fail("decoder kernel and stride must be positive");
  if (d.output_theta() != model.grid.n_cols() || d.output_phi() != model.grid.n_rows()) {
    fail("decoder output " + std::to_string(d.output_theta()) + "x" + std::to_string(d.output_phi()) +
         " (theta x phi) does not match grid " + std::to_string(model.grid.n_cols()) + "x" +
         std::to_string(model.grid.n_rows()));
  }
}

void Config::validate() const {
  auto fail = [](const std::string& msg) { throw InvalidArgument("invalid config: " + msg); };
  validate_model(model);
  const auto& ra = model.encoder(Modality::range_angle);
  const auto& rv = model.encoder(Modality::range_velocity);
  if (ra.height != radar.n_rx || ra.width != radar.n_samples || ra.channels != 1) {
    fail("range_angle encoder image must be (radar.n_rx, radar.n_samples) with 1 channel");
  }
  if (rv.height != radar.n_chirps || rv.width != radar.n_samples || rv.channels != 1) {
    fail("range_velocity encoder image must be (radar.n_chirps, radar.n_samples) with 1 channel");
  }
  if (model.encoder(Modality::camera).channels != 1 || model.encoder(Modality::depth).channels != 1) {
    fail("synthetic camera and depth images are single-channel");
  }
  if (radar.n_rx == 0 || radar.n_samples == 0 || radar.n_chirps == 0) fail("radar dims must be >= 1");
  if (!(radar.r_max > 0.0) || !(radar.v_max > 0.0)) fail("radar r_max and v_max must be positive");

  if (train.batch_size < 2) fail("train.batch_size must be >= 2 for batch normalization");
  if (train.epochs == 0) fail("train.epochs must be >= 1");
  if (train.lr_schedule.empty() || train.lr_schedule.front().first_epoch != 1) fail("train.lr_schedule must start at epoch 1");
  for (std::size_t i = 0; i < train.lr_schedule.size(); ++i) {
    if (!(train.lr_schedule[i].lr > 0.0)) fail("learning rates must be positive");
    if (i && train.lr_schedule[i].first_epoch <= train.lr_schedule[i - 1].first_epoch) fail("train.lr_schedule must ascend");
  }
  if (!(train.beta1 >= 0.0 && train.beta1 < 1.0) || !(train.beta2 >= 0.0 && train.beta2 < 1.0) || !(train.eps > 0.0)) {
    fail("adam betas must be in [0, 1) and eps positive");
  }
  if (!(train.band_lo < train.band_hi) || train.band_lo < model.grid.phi_lo() || train.band_hi > model.grid.phi_hi()) {
    fail("train.band must be a non-empty interval inside the grid phi span");
  }
  if (!(train.band_weight > 0.0)) fail("train.band_weight must be positive");

  if (split.train < 0 || split.val < 0 || split.test < 0 || std::abs(split.train + split.val + split.test - 1.0) > 1e-9) {
    fail("split fractions must be non-negative and sum to 1");
  }
  if (!(synth.camera_fov > 0.0 && synth.camera_fov < 180.0)) fail("synth.camera_fov must be in (0, 180)");
  if (!(synth.sensor_height > 0.0) || !(synth.depth_near > 0.0) || !(synth.world_radius > 0.0)) {
    fail("synth sensor_height, depth_near and world_radius must be positive");
  }
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw FormatError("not a finite number: '" + std::string(s) + "'");
  }
  return v;
}

std::uint64_t to_u64(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("not a non-negative integer: '" + std::string(s) + "'");
  return v;
}

std::size_t to_size(std::string_view s) { return static_cast<std::size_t>(to_u64(s)); }

bool to_bool(std::string_view s) {
  s = trim(s);
  if (s == "true") return true;
  if (s == "false") return false;
  throw FormatError("expected true or false, got '" + std::string(s) + "'");
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string fmt(std::uint64_t v) { return std::to_string(v); }
std::string fmt_bool(bool v) { return v ? "true" : "false"; }

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& each, const char* sep = ",") {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) s += sep;
    s += each(items[i]);
  }
  return s;
}

// Grid fields are collected loosely and turned into a GridSpec at the end,
// since the individual keys are only meaningful together.
struct Draft {
  Config config;
  double theta_lo;
  double theta_hi;
  double theta_step;
  std::vector<AngleRegion> regions;
  double max_range;

  explicit Draft(const Config& base)
      : config(base),
        theta_lo(base.model.grid.theta_lo()),
        theta_hi(base.model.grid.theta_hi()),
        theta_step(base.model.grid.theta_step()),
        regions(base.model.grid.phi_regions()),
        max_range(base.model.grid.max_range()) {}
};

struct KeyDef {
  std::string key;
  std::string doc;
  std::function<void(Draft&, std::string_view)> set;
  std::function<std::string(const Config&)> get;
};

std::vector<KeyDef> build_registry() {
  std::vector<KeyDef> r;
  auto add = [&r](std::string key, std::string doc, std::function<void(Draft&, std::string_view)> set,
                  std::function<std::string(const Config&)> get) {
    r.push_back({std::move(key), std::move(doc), std::move(set), std::move(get)});
  };

  add("grid.theta_lo", "lowest azimuth, degrees (default -180)", [](Draft& d, std::string_view v) { d.theta_lo = to_double(v); },
      [](const Config& c) { return fmt(c.model.grid.theta_lo()); });
  add("grid.theta_hi", "azimuth upper bound (exclusive), degrees (default 180)",
      [](Draft& d, std::string_view v) { d.theta_hi = to_double(v); },
      [](const Config& c) { return fmt(c.model.grid.theta_hi()); });
  add("grid.theta_step", "azimuth bin width, degrees (default 0.25)",
      [](Draft& d, std::string_view v) { d.theta_step = to_double(v); },
      [](const Config& c) { return fmt(c.model.grid.theta_step()); });
  add("grid.phi_regions", "elevation regions lo:hi:step, ascending and contiguous (default -60:-5:0.25,-5:5:0.015625,5:62:0.25)",
      [](Draft& d, std::string_view v) {
        d.regions.clear();
        for (auto item : split_list(v, ',')) {
          const auto parts = split_list(item, ':');
          if (parts.size() != 3) throw FormatError("phi region must be lo:hi:step, got '" + std::string(item) + "'");
          d.regions.push_back({to_double(parts[0]), to_double(parts[1]), to_double(parts[2])});
        }
      },
      [](const Config& c) {
        return join(c.model.grid.phi_regions(),
                    [](const AngleRegion& a) { return fmt(a.lo) + ":" + fmt(a.hi) + ":" + fmt(a.step); });
      });
  add("grid.max_range", "largest stored range, meters (default 100)", [](Draft& d, std::string_view v) { d.max_range = to_double(v); },
      [](const Config& c) { return fmt(c.model.grid.max_range()); });

  add("radar.n_rx", "receive antennas per cube (default 4)", [](Draft& d, std::string_view v) { d.config.radar.n_rx = to_size(v); },
      [](const Config& c) { return fmt(std::uint64_t{c.radar.n_rx}); });
  add("radar.n_samples", "samples per chirp (default 256)",
      [](Draft& d, std::string_view v) { d.config.radar.n_samples = to_size(v); },
      [](const Config& c) { return fmt(std::uint64_t{c.radar.n_samples}); });
  add("radar.n_chirps", "chirps per frame (default 128)", [](Draft& d, std::string_view v) { d.config.radar.n_chirps = to_size(v); },
      [](const Config& c) { return fmt(std::uint64_t{c.radar.n_chirps}); });
  add("radar.r_max", "range at normalized frequency 1, meters (default 50)",
      [](Draft& d, std::string_view v) { d.config.radar.r_max = to_double(v); },
      [](const Config& c) { return fmt(c.radar.r_max); });
  add("radar.v_max", "radial speed at normalized frequency 1, m/s (default 20)",
      [](Draft& d, std::string_view v) { d.config.radar.v_max = to_double(v); },
      [](const Config& c) { return fmt(c.radar.v_max); });

  for (auto m : kModalities) {
    const std::string p = "encoder." + std::string(modality_name(m)) + ".";
    const auto i = static_cast<std::size_t>(m);
    add(p + "image_size", "input height,width (defaults: camera/depth 224,224; range_angle n_rx,n_samples; range_velocity n_chirps,n_samples)",
        [i](Draft& d, std::string_view v) {
          const auto parts = split_list(v, ',');
          if (parts.size() != 2) throw FormatError("image_size must be height,width");
          d.config.model.encoders[i].height = to_size(parts[0]);
          d.config.model.encoders[i].width = to_size(parts[1]);
        },
        [i](const Config& c) {
          return fmt(std::uint64_t{c.model.encoders[i].height}) + "," + fmt(std::uint64_t{c.model.encoders[i].width});
        });
    add(p + "channels", "image channels (default 1)", [i](Draft& d, std::string_view v) { d.config.model.encoders[i].channels = to_size(v); },
        [i](const Config& c) { return fmt(std::uint64_t{c.model.encoders[i].channels}); });
    add(p + "patch_size", "square patch edge, pixels (default 16; range_angle 4)",
        [i](Draft& d, std::string_view v) { d.config.model.encoders[i].patch_size = to_size(v); },
        [i](const Config& c) { return fmt(std::uint64_t{c.model.encoders[i].patch_size}); });
    add(p + "depth", "encoder layers (default 1)", [i](Draft& d, std::string_view v) { d.config.model.encoders[i].depth = to_size(v); },
        [i](const Config& c) { return fmt(std::uint64_t{c.model.encoders[i].depth}); });
    add(p + "n_heads", "attention heads (default 12)", [i](Draft& d, std::string_view v) { d.config.model.encoders[i].n_heads = to_size(v); },
        [i](const Config& c) { return fmt(std::uint64_t{c.model.encoders[i].n_heads}); });
    add(p + "d_model", "internal token width (default 768)",
        [i](Draft& d, std::string_view v) { d.config.model.encoders[i].d_model = to_size(v); },
        [i](const Config& c) { return fmt(std::uint64_t{c.model.encoders[i].d_model}); });
    add(p + "ffn_dim", "feed-forward width (default 3072)",
        [i](Draft& d, std::string_view v) { d.config.model.encoders[i].ffn_dim = to_size(v); },
        [i](const Config& c) { return fmt(std::uint64_t{c.model.encoders[i].ffn_dim}); });
    add(p + "frozen", "exclude encoder parameters from training (default true)",
        [i](Draft& d, std::string_view v) { d.config.model.encoders[i].frozen = to_bool(v); },
        [i](const Config& c) { return fmt_bool(c.model.encoders[i].frozen); });
  }

  add("fusion.mode", "transformer or none (none = no-fusion ablation; default transformer)",
      [](Draft& d, std::string_view v) {
        v = trim(v);
        if (v == "transformer") d.config.model.fusion.mode = FusionMode::transformer;
        else if (v == "none") d.config.model.fusion.mode = FusionMode::none;
        else throw FormatError("fusion.mode must be transformer or none");
      },
      [](const Config& c) { return std::string(c.model.fusion.mode == FusionMode::transformer ? "transformer" : "none"); });
  add("fusion.d_model", "token width, must be 768 (default 768)",
      [](Draft& d, std::string_view v) { d.config.model.fusion.d_model = to_size(v); },
      [](const Config& c) { return fmt(std::uint64_t{c.model.fusion.d_model}); });
  add("fusion.n_heads", "attention heads (default 12)", [](Draft& d, std::string_view v) { d.config.model.fusion.n_heads = to_size(v); },
      [](const Config& c) { return fmt(std::uint64_t{c.model.fusion.n_heads}); });
  add("fusion.ffn_dim", "feed-forward width (default 2048)",
      [](Draft& d, std::string_view v) { d.config.model.fusion.ffn_dim = to_size(v); },
      [](const Config& c) { return fmt(std::uint64_t{c.model.fusion.ffn_dim}); });
  add("fusion.dropout", "dropout probability (default 0.1)",
      [](Draft& d, std::string_view v) { d.config.model.fusion.dropout = to_double(v); },
      [](const Config& c) { return fmt(c.model.fusion.dropout); });
  add("fusion.n_layers", "transformer encoder layers (default 1)",
      [](Draft& d, std::string_view v) { d.config.model.fusion.n_layers = to_size(v); },
      [](const Config& c) { return fmt(std::uint64_t{c.model.fusion.n_layers}); });
  add("fusion.latent_dim", "latent vector width (default 1024)",
      [](Draft& d, std::string_view v) { d.config.model.fusion.latent_dim = to_size(v); },
      [](const Config& c) { return fmt(std::uint64_t{c.model.fusion.latent_dim}); });

  add("decoder.seed", "seed matrix theta,phi (default 45,34)",
      [](Draft& d, std::string_view v) {
        const auto parts = split_list(v, ',');
        if (parts.size() != 2) throw FormatError("decoder.seed must be theta,phi");
        d.config.model.decoder.seed_theta = to_size(parts[0]);
        d.config.model.decoder.seed_phi = to_size(parts[1]);
      },
      [](const Config& c) {
        return fmt(std::uint64_t{c.model.decoder.seed_theta}) + "," + fmt(std::uint64_t{c.model.decoder.seed_phi});
      });
  add("decoder.filters", "hidden transpose-conv channels (default 256,128,64,64)",
      [](Draft& d, std::string_view v) {
        d.config.model.decoder.filters.clear();
        for (auto item : split_list(v, ',')) d.config.model.decoder.filters.push_back(to_size(item));
      },
      [](const Config& c) { return join(c.model.decoder.filters, [](std::size_t f) { return fmt(std::uint64_t{f}); }); });
  add("decoder.kernel", "transpose-conv kernel size (default 4)",
      [](Draft& d, std::string_view v) { d.config.model.decoder.kernel = to_size(v); },
      [](const Config& c) { return fmt(std::uint64_t{c.model.decoder.kernel}); });
  add("decoder.stride", "transpose-conv stride (default 2)",
      [](Draft& d, std::string_view v) { d.config.model.decoder.stride = to_size(v); },
      [](const Config& c) { return fmt(std::uint64_t{c.model.decoder.stride}); });
  add("decoder.padding", "transpose-conv padding (default 1)",
      [](Draft& d, std::string_view v) { d.config.model.decoder.padding = to_size(v); },
      [](const Config& c) { return fmt(std::uint64_t{c.model.decoder.padding}); });
  add("model.seed", "parameter initialization seed (default 1)", [](Draft& d, std::string_view v) { d.config.model.seed = to_u64(v); },
      [](const Config& c) { return fmt(c.model.seed); });

  add("train.batch_size", "mini-batch size (default 32)", [](Draft& d, std::string_view v) { d.config.train.batch_size = to_size(v); },
      [](const Config& c) { return fmt(std::uint64_t{c.train.batch_size}); });
  add("train.epochs", "training epochs (default 20)", [](Draft& d, std::string_view v) { d.config.train.epochs = to_size(v); },
      [](const Config& c) { return fmt(std::uint64_t{c.train.epochs}); });
  add("train.lr_schedule", "first_epoch:lr phases (default 1:0.001,11:0.0001)",
      [](Draft& d, std::string_view v) {
        d.config.train.lr_schedule.clear();
        for (auto item : split_list(v, ',')) {
          const auto parts = split_list(item, ':');
          if (parts.size() != 2) throw FormatError("lr phase must be epoch:lr, got '" + std::string(item) + "'");
          d.config.train.lr_schedule.push_back({to_size(parts[0]), to_double(parts[1])});
        }
      },
      [](const Config& c) {
        return join(c.train.lr_schedule, [](const LrPhase& p) { return fmt(std::uint64_t{p.first_epoch}) + ":" + fmt(p.lr); });
      });
  add("train.beta1", "Adam beta1 (default 0.9)", [](Draft& d, std::string_view v) { d.config.train.beta1 = to_double(v); },
      [](const Config& c) { return fmt(c.train.beta1); });
  add("train.beta2", "Adam beta2 (default 0.999)", [](Draft& d, std::string_view v) { d.config.train.beta2 = to_double(v); },
      [](const Config& c) { return fmt(c.train.beta2); });
  add("train.eps", "Adam epsilon (default 1e-08)", [](Draft& d, std::string_view v) { d.config.train.eps = to_double(v); },
      [](const Config& c) { return fmt(c.train.eps); });
  add("train.seed", "batch shuffling and dropout seed (default 7)", [](Draft& d, std::string_view v) { d.config.train.seed = to_u64(v); },
      [](const Config& c) { return fmt(c.train.seed); });
  add("train.band", "elevation band lo,hi given extra loss weight, degrees (default -1.71875,2.1875)",
      [](Draft& d, std::string_view v) {
        const auto parts = split_list(v, ',');
        if (parts.size() != 2) throw FormatError("train.band must be lo,hi");
        d.config.train.band_lo = to_double(parts[0]);
        d.config.train.band_hi = to_double(parts[1]);
      },
      [](const Config& c) { return fmt(c.train.band_lo) + "," + fmt(c.train.band_hi); });
  add("train.band_weight", "loss weight inside the band (default 10)",
      [](Draft& d, std::string_view v) { d.config.train.band_weight = to_double(v); },
      [](const Config& c) { return fmt(c.train.band_weight); });
  add("train.normalize_ranges", "divide ranges by grid.max_range before the loss (default false)",
      [](Draft& d, std::string_view v) { d.config.train.normalize_ranges = to_bool(v); },
      [](const Config& c) { return fmt_bool(c.train.normalize_ranges); });

  add("split.train", "leading fraction of each scenario used for training (default 0.6)",
      [](Draft& d, std::string_view v) { d.config.split.train = to_double(v); },
      [](const Config& c) { return fmt(c.split.train); });
  add("split.val", "next fraction used for validation (default 0.2)",
      [](Draft& d, std::string_view v) { d.config.split.val = to_double(v); },
      [](const Config& c) { return fmt(c.split.val); });
  add("split.test", "trailing fraction used for testing (default 0.2)",
      [](Draft& d, std::string_view v) { d.config.split.test = to_double(v); },
      [](const Config& c) { return fmt(c.split.test); });

  add("synth.camera_fov", "camera horizontal field of view, degrees (default 90)",
      [](Draft& d, std::string_view v) { d.config.synth.camera_fov = to_double(v); },
      [](const Config& c) { return fmt(c.synth.camera_fov); });
  add("synth.sensor_height", "sensor height above ground, meters (default 1.7)",
      [](Draft& d, std::string_view v) { d.config.synth.sensor_height = to_double(v); },
      [](const Config& c) { return fmt(c.synth.sensor_height); });
  add("synth.depth_near", "depth mapped to inverse-depth 1, meters (default 1)",
      [](Draft& d, std::string_view v) { d.config.synth.depth_near = to_double(v); },
      [](const Config& c) { return fmt(c.synth.depth_near); });
  add("synth.world_radius", "maximum primitive distance, meters (default 40)",
      [](Draft& d, std::string_view v) { d.config.synth.world_radius = to_double(v); },
      [](const Config& c) { return fmt(c.synth.world_radius); });
  return r;
}

const std::vector<KeyDef>& registry() {
  static const std::vector<KeyDef> r = build_registry();
  return r;
}

}  // namespace

namespace {

Draft parse_draft(std::string_view text, const Config& base) {
  Draft draft(base);
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const auto where = "config line " + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw FormatError(where + "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    const auto& reg = registry();
    auto it = std::find_if(reg.begin(), reg.end(), [&](const KeyDef& k) { return k.key == key; });
    if (it == reg.end()) throw FormatError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw FormatError(where + "duplicate key '" + key + "'");
    try {
      it->set(draft, value);
    } catch (const FormatError& e) {
      throw FormatError(where + key + ": " + e.what());
    }
  }
  return draft;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Config parse_config(std::string_view text, const Config& base) {
  Draft draft = parse_draft(text, base);
  try {
    draft.config.model.grid = GridSpec(draft.theta_lo, draft.theta_hi, draft.theta_step, draft.regions, draft.max_range);
    draft.config.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
  return draft.config;
}

Config load_config(const std::string& path, const Config& base) { return parse_config(read_file(path), base); }

GridSpec parse_grid(std::string_view text, const Config& base) {
  Draft draft = parse_draft(text, base);
  try {
    return GridSpec(draft.theta_lo, draft.theta_hi, draft.theta_step, draft.regions, draft.max_range);
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
}

GridSpec load_grid(const std::string& path, const Config& base) { return parse_grid(read_file(path), base); }

std::string to_text(const Config& config) {
  std::string out;
  for (const auto& k : registry()) out += k.key + " = " + k.get(config) + "\n";
  return out;
}

std::string model_signature(const Config& config) {
  std::string out;
  for (const auto& k : registry()) {
    if (k.key.starts_with("train.") || k.key.starts_with("split.") || k.key.starts_with("synth.")) continue;
    out += k.key + " = " + k.get(config) + "\n";
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> config_key_docs() {
  std::vector<std::pair<std::string, std::string>> docs;
  for (const auto& k : registry()) docs.emplace_back(k.key, k.doc);
  return docs;
}

}  // namespace lidarsynth
