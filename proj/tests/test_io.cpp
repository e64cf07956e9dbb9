// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "fixtures.hpp"
#include "lidarsynth/error.hpp"
#include "lidarsynth/io.hpp"
#include "lidarsynth/model.hpp"

using namespace lidarsynth;

namespace {

std::string bytes(std::initializer_list<int> b) {
  std::string s;
  for (int v : b) s.push_back(static_cast<char>(v));
  return s;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream(path, std::ios::binary) << content;
}

}  // namespace

TEST(Lstf, ExactByteLayout) {
  std::ostringstream out;
  const std::vector<std::uint32_t> dims{2};
  const std::vector<float> data{1.0f, -2.0f};
  write_lstf(out, dims, data);
  EXPECT_EQ(out.str(), std::string("LSTF") + bytes({1, 1, 2, 0, 0, 0, 0, 0, 0x80, 0x3f, 0, 0, 0, 0xc0}));
}

TEST(Lstf, RoundTripIsBitExact) {
  fixtures::TempDir dir;
  const std::vector<std::uint32_t> dims{2, 3, 1};
  const std::vector<float> data{0.1f, -0.0f, std::numeric_limits<float>::denorm_min(), 1e30f, -7.25f, 3.0f};
  save_lstf(dir / "t.lstf", dims, data);
  const auto r = load_lstf(dir / "t.lstf");
  EXPECT_EQ(r.dims, dims);
  ASSERT_EQ(r.data.size(), data.size());
  EXPECT_EQ(std::memcmp(r.data.data(), data.data(), data.size() * sizeof(float)), 0);
}

TEST(Lstf, RejectsMalformedFiles) {
  fixtures::TempDir dir;
  const std::string good = std::string("LSTF") + bytes({1, 1, 1, 0, 0, 0, 0, 0, 0x80, 0x3f});
  auto expect_bad = [&](const std::string& content) {
    write_file(dir / "bad.lstf", content);
    EXPECT_THROW(load_lstf(dir / "bad.lstf"), FormatError);
  };
  write_file(dir / "good.lstf", good);
  EXPECT_EQ(load_lstf(dir / "good.lstf").data, std::vector<float>{1.0f});
  expect_bad("LSTX" + good.substr(4));                 // magic
  expect_bad("LSTF" + bytes({2}) + good.substr(5));    // version
  expect_bad(good.substr(0, good.size() - 1));         // truncated payload
  expect_bad(good.substr(0, 7));                       // truncated header
  expect_bad(good + bytes({0}));                       // trailing bytes
  expect_bad("");
  EXPECT_THROW(load_lstf(dir / "missing.lstf"), Error);
  const std::vector<std::uint32_t> dims{1};
  const std::vector<float> two{1.0f, 2.0f};
  EXPECT_THROW(save_lstf(dir / "x.lstf", dims, two), InvalidArgument);
}

TEST(Lspc, RoundTripAndErrors) {
  fixtures::TempDir dir;
  const std::vector<Point3> pts{{1.5f, -2.0f, 0.25f}, {0.0f, 0.0f, 9.0f}};
  save_points(dir / "p.lspc", pts);
  const auto back = load_points(dir / "p.lspc");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].x, 1.5f);
  EXPECT_EQ(back[1].z, 9.0f);
  write_file(dir / "bad.lspc", std::string("LSPC") + bytes({2, 0, 0, 0}) + std::string(12, '\0'));
  EXPECT_THROW(load_points(dir / "bad.lspc"), FormatError);
  save_points(dir / "empty.lspc", {});
  EXPECT_TRUE(load_points(dir / "empty.lspc").empty());
}

TEST(Raster, SaveLoadChecksGrid) {
  const auto cfg = fixtures::tiny_config();
  fixtures::TempDir dir;
  PolarRaster r(cfg.model.grid);
  r.set(1, 2, 12.5f);
  save_raster(dir / "r.lstf", r);
  EXPECT_EQ(load_raster(dir / "r.lstf", cfg.model.grid), r);
  EXPECT_THROW(load_raster(dir / "r.lstf", Config::toy().model.grid), FormatError);
  r = PolarRaster(cfg.model.grid);
  const std::vector<std::uint32_t> dims{8, 12};
  std::vector<float> bad(96, 0.0f);
  bad[5] = -1.0f;
  save_lstf(dir / "neg.lstf", dims, bad);
  EXPECT_THROW(load_raster(dir / "neg.lstf", cfg.model.grid), FormatError);
}

TEST(Checkpoint, RoundTripWithAdamState) {
  const auto cfg = fixtures::tiny_config();
  LidarModel model(cfg.model);
  auto& first = model.params().entries().front();
  first.adam.step = 3;
  first.adam.m.assign(first.value.values().size(), 0.5f);
  first.adam.v.assign(first.value.values().size(), 0.25f);
  fixtures::TempDir dir;
  save_checkpoint(dir / "m.lsck", cfg, model.params());
  const auto ck = load_checkpoint(dir / "m.lsck", &cfg);
  EXPECT_EQ(ck.config, cfg);
  ASSERT_EQ(ck.params.size(), model.params().size());
  for (const auto& e : model.params().entries()) {
    const auto& got = ck.params.get(e.name);
    EXPECT_EQ(got.shape(), e.value.shape()) << e.name;
    EXPECT_TRUE(std::equal(got.values().begin(), got.values().end(), e.value.values().begin())) << e.name;
  }
  const auto& a = ck.params.entry(first.name).adam;
  EXPECT_EQ(a.step, 3u);
  EXPECT_EQ(a.m, first.adam.m);
  EXPECT_EQ(a.v, first.adam.v);

  save_checkpoint(dir / "plain.lsck", cfg, model.params(), false);
  EXPECT_EQ(load_checkpoint(dir / "plain.lsck").params.entry(first.name).adam.step, 0u);

  // adopting the stored values gives the same forward pass
  LidarModel restored(ck.config.model, ck.params);
  EXPECT_EQ(restored.params().parameter_count(), model.params().parameter_count());
}

TEST(Checkpoint, SignatureMismatchAndForce) {
  const auto cfg = fixtures::tiny_config();
  LidarModel model(cfg.model);
  fixtures::TempDir dir;
  save_checkpoint(dir / "m.lsck", cfg, model.params());
  auto other = cfg;
  other.model.decoder.filters = {4};
  EXPECT_THROW(load_checkpoint(dir / "m.lsck", &other), FormatError);
  EXPECT_NO_THROW(load_checkpoint(dir / "m.lsck", &other, true));
  auto retrained = cfg;
  retrained.train.epochs = 9;  // training settings are not part of the signature
  EXPECT_NO_THROW(load_checkpoint(dir / "m.lsck", &retrained));

  std::ifstream in(dir / "m.lsck", std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), {});
  write_file(dir / "cut.lsck", content.substr(0, content.size() / 2));
  EXPECT_THROW(load_checkpoint(dir / "cut.lsck"), FormatError);
  write_file(dir / "magic.lsck", "LSCX" + content.substr(4));
  EXPECT_THROW(load_checkpoint(dir / "magic.lsck"), FormatError);
}

TEST(Pgm, ScalingAndOrientation) {
  const std::vector<float> zeros(6, 0.0f), constant(6, 4.0f), ramp{0, 0, 0, 10, 10, 10};
  const auto header = std::string("P5\n3 2\n255\n");
  auto pixels = [&](const std::vector<std::uint8_t>& img) {
    EXPECT_EQ(std::string(img.begin(), img.begin() + static_cast<long>(header.size())), header);
    return std::vector<int>(img.begin() + static_cast<long>(header.size()), img.end());
  };
  EXPECT_EQ(pixels(render_pgm(2, 3, zeros)), (std::vector<int>{0, 0, 0, 0, 0, 0}));
  EXPECT_EQ(pixels(render_pgm(2, 3, constant)), (std::vector<int>{128, 128, 128, 128, 128, 128}));
  // row 1 (higher elevation) is written first
  EXPECT_EQ(pixels(render_pgm(2, 3, ramp)), (std::vector<int>{255, 255, 255, 0, 0, 0}));
  EXPECT_THROW(render_pgm(2, 2, ramp), InvalidArgument);
}

TEST(Pgm, RasterUsesGridDims) {
  const auto cfg = fixtures::tiny_config();
  PolarRaster r(cfg.model.grid);
  r.set(cfg.model.grid.n_rows() - 1, 0, 5.0f);
  const auto img = render_pgm(r);
  const std::string header = "P5\n12 8\n255\n";
  ASSERT_EQ(img.size(), header.size() + 96);
  EXPECT_EQ(img[header.size()], 255);
  EXPECT_EQ(img[header.size() + 1], 0);
}
