// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#include "lidarsynth/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "lidarsynth/config.hpp"
#include "lidarsynth/error.hpp"
#include "lidarsynth/geometry.hpp"
#include "lidarsynth/io.hpp"
#include "lidarsynth/model.hpp"
#include "lidarsynth/radar_dsp.hpp"
#include "lidarsynth/synthgen.hpp"
#include "lidarsynth/training.hpp"

namespace lidarsynth {
namespace {

struct Options {
  std::string out, config, data, ckpt, report, points, grid, raster, cube, out_ra, out_rv, profile = "mixed";
  std::string ablation, ablation_ckpt;
  std::size_t num = 0;
  std::uint64_t seed = 1;
  bool force = false;
  bool quiet = false;
};

Config config_or_default(const std::string& path) {
  return path.empty() ? Config::full_scale() : load_config(path);
}

GridSpec grid_or_default(const std::string& path) { return path.empty() ? GridSpec::full_scale() : load_grid(path); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open for writing: " + path);
  out << text;
  if (!out) throw FormatError("write failed: " + path);
}

int cmd_synth(const Options& o, std::ostream& out) {
  const Config config = config_or_default(o.config);
  if (o.profile != "mixed") scene_profile(o.profile);  // reject unknown names up front
  synthesize_dataset(config, o.out, o.num, o.profile, o.seed);
  out << "wrote " << o.num << " samples to " << o.out << "\n";
  return kExitOk;
}

int cmd_preprocess_radar(const Options& o, std::ostream&) {
  const auto rec = load_lstf(o.cube);
  if (rec.dims.size() != 4 || rec.dims[3] != 2) {
    throw FormatError(o.cube + ": radar cube must be [n_rx, n_samples, n_chirps, 2]");
  }
  RadarCube cube = [&] {
    try {
      return RadarCube::from_interleaved(rec.dims[0], rec.dims[1], rec.dims[2], rec.data);
    } catch (const InvalidArgument& e) {
      throw FormatError(o.cube + ": " + e.what());
    }
  }();
  const RadarCube rc = range_transform(cube);
  for (const auto& [map, path] : {std::pair{range_angle_map(rc), o.out_ra}, std::pair{range_velocity_map(rc), o.out_rv}}) {
    const std::array<std::uint32_t, 2> dims{static_cast<std::uint32_t>(map.rows), static_cast<std::uint32_t>(map.cols)};
    save_lstf(path, dims, map.data);
  }
  return kExitOk;
}

int cmd_rasterize(const Options& o, std::ostream& out) {
  const GridSpec grid = grid_or_default(o.grid);
  const auto points = load_points(o.points);
  const auto res = rasterize(points, grid);
  save_raster(o.out, res.raster);
  out << "bins " << res.raster.nonzero_count() << " dropped " << res.dropped << "\n";
  return kExitOk;
}

int cmd_derasterize(const Options& o, std::ostream& out) {
  const GridSpec grid = grid_or_default(o.grid);
  const auto points = derasterize(load_raster(o.raster, grid));
  save_points(o.out, points);
  out << "points " << points.size() << "\n";
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  Config config = config_or_default(o.config);
  if (o.ablation == "no-fusion") config.model.fusion.mode = FusionMode::none;
  else if (!o.ablation.empty()) throw InvalidArgument("unknown ablation '" + o.ablation + "'");
  const Dataset data = load_dataset(o.data, config);
  const Split split = split_dataset(data, config.split);
  TrainOptions opts;
  if (!o.quiet) {
    opts.on_epoch = [&out](const EpochRecord& r) {
      out << "epoch " << r.epoch << " lr " << r.lr << " train " << r.train_mmse << " val " << r.val_mmse << "\n";
      out.flush();
    };
  }
  const auto result = train(data, split, config, opts);
  const auto dir = std::filesystem::path(o.out).parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  save_checkpoint(o.out, config, result.best);
  save_checkpoint(o.out + ".final", config, result.final);
  write_text((dir / "history.txt").string(), history_text(result.history));
  out << "best epoch " << result.best_epoch << ", checkpoint " << o.out << "\n";
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const Config* expected = nullptr;
  std::optional<Config> user;
  if (!o.config.empty()) {
    user = load_config(o.config);
    expected = &*user;
  }
  auto ckpt = load_checkpoint(o.ckpt, expected, o.force);
  const Config config = user ? *user : ckpt.config;
  const Dataset data = load_dataset(o.data, config);
  const Split split = split_dataset(data, config.split);
  LidarModel model(ckpt.config.model, std::move(ckpt.params));
  EvalReport report = evaluate(model, config, data, split.test);
  if (!o.ablation_ckpt.empty()) {
    auto abl = load_checkpoint(o.ablation_ckpt);
    LidarModel abl_model(abl.config.model, std::move(abl.params));
    report.ablation_no_fusion = evaluate(abl_model, abl.config, data, split.test).overall;
  }
  write_text(o.report, report.to_text());
  out << report.to_text();
  return kExitOk;
}

int cmd_render(const Options& o, std::ostream&) {
  const auto rec = load_lstf(o.raster);
  if (rec.dims.size() != 2) throw FormatError(o.raster + ": raster must be a rank-2 record");
  save_pgm(o.out, rec.dims[0], rec.dims[1], rec.data);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) { return run_cli(args, std::cout, std::cerr); }

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthesize LiDAR range images from camera and radar inputs", "lidarsynth"};
  app.require_subcommand(1, 1);
  Options o;

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--out", o.out, "output dataset directory")->required();
  synth->add_option("--num", o.num, "number of samples")->required();
  synth->add_option("--profile", o.profile, "scene profile name or 'mixed'");
  synth->add_option("--seed", o.seed, "base seed");
  synth->add_option("--config", o.config, "config file (image, radar and grid dims)");

  auto* pre = app.add_subcommand("preprocess-radar", "radar cube to range-angle and range-velocity maps");
  pre->add_option("--cube", o.cube, "radar cube LSTF [n_rx, n_samples, n_chirps, 2]")->required();
  pre->add_option("--out-ra", o.out_ra, "range-angle map output")->required();
  pre->add_option("--out-rv", o.out_rv, "range-velocity map output")->required();

  auto* ras = app.add_subcommand("rasterize", "point cloud to polar raster");
  ras->add_option("--points", o.points, "LSPC point cloud")->required();
  ras->add_option("--grid", o.grid, "config file with grid.* keys");
  ras->add_option("--out", o.out, "raster LSTF output")->required();

  auto* deras = app.add_subcommand("derasterize", "polar raster to point cloud");
  deras->add_option("--raster", o.raster, "raster LSTF")->required();
  deras->add_option("--grid", o.grid, "config file with grid.* keys");
  deras->add_option("--out", o.out, "LSPC output")->required();

  auto* tr = app.add_subcommand("train", "train a model on a dataset");
  tr->add_option("--data", o.data, "dataset directory")->required();
  tr->add_option("--config", o.config, "config file");
  tr->add_option("--out", o.out, "checkpoint output (best validation epoch)")->required();
  tr->add_option("--ablation", o.ablation, "'no-fusion' bypasses the fusion transformer");
  tr->add_flag("--quiet", o.quiet, "no per-epoch output");

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  ev->add_option("--data", o.data, "dataset directory")->required();
  ev->add_option("--ckpt", o.ckpt, "checkpoint")->required();
  ev->add_option("--report", o.report, "report output")->required();
  ev->add_option("--config", o.config, "config to check the checkpoint against");
  ev->add_flag("--force", o.force, "load a checkpoint even if its model config differs");
  ev->add_option("--ablation-ckpt", o.ablation_ckpt, "no-fusion checkpoint to report alongside");

  auto* rd = app.add_subcommand("render", "raster to PGM image");
  rd->add_option("--raster", o.raster, "raster LSTF")->required();
  rd->add_option("--out", o.out, "PGM output")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (!app.get_subcommands().empty()) err << app.get_subcommands().front()->help();
    else err << app.help();
    return kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(o, out);
    if (pre->parsed()) return cmd_preprocess_radar(o, out);
    if (ras->parsed()) return cmd_rasterize(o, out);
    if (deras->parsed()) return cmd_derasterize(o, out);
    if (tr->parsed()) return cmd_train(o, out);
    if (ev->parsed()) return cmd_eval(o, out);
    if (rd->parsed()) return cmd_render(o, out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const FormatError& e) {
    err << "malformed input: " << e.what() << "\n";
    return kExitMalformed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitMalformed;
  }
  return kExitUsage;
}

}  // namespace lidarsynth
