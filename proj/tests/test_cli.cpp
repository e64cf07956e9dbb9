// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "lidarsynth/cli.hpp"
#include "lidarsynth/io.hpp"
#include "lidarsynth/synthgen.hpp"

using namespace lidarsynth;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string tiny_config_file(const fixtures::TempDir& dir) {
  const std::string path = dir / "tiny.cfg";
  std::ofstream(path) << to_text(fixtures::tiny_config());
  return path;
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"bogus"}).code, kExitUsage);
  EXPECT_EQ(run({"synth", "--num", "3"}).code, kExitUsage);
  EXPECT_EQ(run({"synth", "--out", "x", "--num", "minus"}).code, kExitUsage);
  fixtures::TempDir dir;
  EXPECT_EQ(run({"synth", "--out", dir / "d", "--num", "1", "--profile", "foggy"}).code, kExitUsage);
  EXPECT_EQ(run({"train", "--data", dir.str(), "--out", dir / "m.lsck", "--ablation", "half"}).code, kExitUsage);
  const auto help = run({"--help"});
  EXPECT_EQ(help.code, kExitOk);
  EXPECT_NE(help.out.find("rasterize"), std::string::npos);
}

TEST(Cli, MalformedInputs) {
  fixtures::TempDir dir;
  std::ofstream(dir / "junk.lstf") << "not a tensor";
  EXPECT_EQ(run({"preprocess-radar", "--cube", dir / "junk.lstf", "--out-ra", dir / "a", "--out-rv", dir / "b"}).code,
            kExitMalformed);
  const std::vector<std::uint32_t> dims{2, 3};
  const std::vector<float> data(6, 1.0f);
  save_lstf(dir / "rank2.lstf", dims, data);
  const auto r = run({"preprocess-radar", "--cube", dir / "rank2.lstf", "--out-ra", dir / "a", "--out-rv", dir / "b"});
  EXPECT_EQ(r.code, kExitMalformed);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(run({"render", "--raster", dir / "missing.lstf", "--out", dir / "x.pgm"}).code, kExitMalformed);
  std::ofstream(dir / "bad.cfg") << "model.nonsense = 4\n";
  EXPECT_EQ(run({"synth", "--out", dir / "d", "--num", "1", "--config", dir / "bad.cfg"}).code, kExitMalformed);
}

TEST(Cli, SynthEmptyAndRepeatable) {
  fixtures::TempDir dir;
  const auto cfg = tiny_config_file(dir);
  EXPECT_EQ(run({"synth", "--out", dir / "none", "--num", "0"}).code, kExitOk);
  EXPECT_TRUE(fs::is_directory(dir / "none"));
  EXPECT_TRUE(fs::is_empty(dir / "none"));
  for (const char* name : {"a", "b"})
    ASSERT_EQ(run({"synth", "--out", dir / name, "--num", "3", "--seed", "11", "--config", cfg}).code, kExitOk);
  for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir / "a").string();
    EXPECT_EQ(slurp(e.path().string()), slurp(dir / ("b/" + rel))) << rel;
  }
}

TEST(Cli, PreprocessRasterizeRender) {
  fixtures::TempDir dir;
  const auto cfg_path = tiny_config_file(dir);
  ASSERT_EQ(run({"synth", "--out", dir / "d", "--num", "1", "--config", cfg_path, "--profile", "day_dense"}).code, 0);
  const std::string sample = dir / "d/sample_000000";
  ASSERT_EQ(run({"preprocess-radar", "--cube", sample + "/radar_cube.lstf", "--out-ra", dir / "ra.lstf", "--out-rv",
                 dir / "rv.lstf"}).code,
            kExitOk);
  const auto ra = load_lstf(dir / "ra.lstf");
  EXPECT_EQ(ra.dims, (std::vector<std::uint32_t>{4, 8}));  // angle bins x range bins
  for (float v : ra.data) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }

  // raster -> points -> raster on the config grid is the identity
  ASSERT_EQ(run({"derasterize", "--raster", sample + "/target_raster.lstf", "--grid", cfg_path, "--out",
                 dir / "p.lspc"}).code,
            kExitOk);
  const auto ras = run({"rasterize", "--points", dir / "p.lspc", "--grid", cfg_path, "--out", dir / "r.lstf"});
  ASSERT_EQ(ras.code, kExitOk);
  EXPECT_NE(ras.out.find("dropped 0"), std::string::npos);
  EXPECT_EQ(slurp(dir / "r.lstf"), slurp(sample + "/target_raster.lstf"));

  ASSERT_EQ(run({"render", "--raster", dir / "r.lstf", "--out", dir / "r.pgm"}).code, kExitOk);
  EXPECT_EQ(slurp(dir / "r.pgm").rfind("P5\n12 8\n255\n", 0), 0u);
}

TEST(Cli, RasterizeDefaultGrid) {
  fixtures::TempDir dir;
  const std::vector<Point3> pts{{10, 0, 0}, {0, 5, 0}, {500, 0, 0}};
  save_points(dir / "p.lspc", pts);
  const auto r = run({"rasterize", "--points", dir / "p.lspc", "--out", dir / "r.lstf"});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("bins 2 dropped 1"), std::string::npos);
  EXPECT_EQ(load_lstf(dir / "r.lstf").dims, (std::vector<std::uint32_t>{1088, 1440}));
}

TEST(Cli, TrainEvalSmoke) {
  fixtures::TempDir dir;
  const auto cfg_path = tiny_config_file(dir);
  ASSERT_EQ(run({"synth", "--out", dir / "d", "--num", "10", "--config", cfg_path, "--seed", "3"}).code, 0);
  const auto tr = run({"train", "--data", dir / "d", "--config", cfg_path, "--out", dir / "m/model.lsck"});
  ASSERT_EQ(tr.code, kExitOk) << tr.err;
  EXPECT_NE(tr.out.find("epoch 3"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "m/model.lsck.final"));
  const auto hist = slurp(dir / "m/history.txt");
  EXPECT_EQ(hist.rfind("# epoch\ttrain_mmse\tval_mmse\tlr\n1\t", 0), 0u);

  ASSERT_EQ(run({"train", "--data", dir / "d", "--config", cfg_path, "--out", dir / "nf/model.lsck", "--ablation",
                 "no-fusion", "--quiet"}).code,
            kExitOk);
  const auto ev = run({"eval", "--data", dir / "d", "--ckpt", dir / "m/model.lsck", "--report", dir / "report.txt",
                       "--ablation-ckpt", dir / "nf/model.lsck"});
  ASSERT_EQ(ev.code, kExitOk) << ev.err;
  const auto report = slurp(dir / "report.txt");
  EXPECT_EQ(report, ev.out);
  for (const char* key : {"overall\t", "baseline_zeros\t", "ablation_no_fusion\t"})
    EXPECT_NE(report.find(key), std::string::npos) << key;

  // a config whose model differs from the checkpoint is refused unless forced
  auto other = fixtures::tiny_config();
  other.model.decoder.filters = {4};
  std::ofstream(dir / "other.cfg") << to_text(other);
  const std::vector<std::string> mismatch{"eval", "--data", dir / "d", "--ckpt", dir / "m/model.lsck", "--report",
                                          dir / "r2.txt", "--config", dir / "other.cfg"};
  EXPECT_EQ(run(mismatch).code, kExitMalformed);
}

TEST(Cli, BinaryExitCodes) {
  const char* bin = std::getenv("LIDARSYNTH_CLI");
  if (bin == nullptr) GTEST_SKIP() << "LIDARSYNTH_CLI not set";
  auto status = [&](const std::string& args) {
    const int raw = std::system((std::string(bin) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  fixtures::TempDir dir;
  std::ofstream(dir / "junk") << "junk";
  EXPECT_EQ(status("--help"), 0);
  EXPECT_EQ(status("frobnicate"), 1);
  EXPECT_EQ(status("render --raster " + (dir / "junk") + " --out " + (dir / "x.pgm")), 2);
  EXPECT_EQ(status("synth --out " + (dir / "d") + " --num 0"), 0);
}
