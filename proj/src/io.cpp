// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#include "lidarsynth/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "lidarsynth/error.hpp"

namespace lidarsynth {
namespace {

constexpr std::array<char, 4> kLstfMagic{'L', 'S', 'T', 'F'};
constexpr std::array<char, 4> kLsckMagic{'L', 'S', 'C', 'K'};
constexpr std::array<char, 4> kLspcMagic{'L', 'S', 'P', 'C'};
constexpr std::string_view kAdamM = "adam.m.";
constexpr std::string_view kAdamV = "adam.v.";
constexpr std::string_view kAdamStep = "adam.step.";

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw FormatError(std::string("truncated input while reading ") + what);
  }
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(static_cast<T>(bytes[i]) << (8 * i));
  return value;
}

void put_f32(std::ostream& out, float v) { put_le(out, std::bit_cast<std::uint32_t>(v)); }

float get_f32(std::istream& in, const char* what) { return std::bit_cast<float>(get_le<std::uint32_t>(in, what)); }

void expect_magic(std::istream& in, const std::array<char, 4>& magic) {
  std::array<char, 4> got{};
  if (!in.read(got.data(), 4) || got != magic) {
    throw FormatError("bad magic, expected " + std::string(magic.begin(), magic.end()));
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open: " + path);
  return in;
}

void finish(std::ostream& out, const std::string& path) {
  out.flush();
  if (!out) throw FormatError("write failed: " + path);
}

void write_payload(std::ostream& out, std::span<const float> data) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(float)));
  } else {
    for (float v : data) put_f32(out, v);
  }
}

void read_payload(std::istream& in, std::span<float> data) {
  if constexpr (std::endian::native == std::endian::little) {
    const auto bytes = static_cast<std::streamsize>(data.size() * sizeof(float));
    if (!in.read(reinterpret_cast<char*>(data.data()), bytes)) throw FormatError("truncated tensor payload");
  } else {
    for (auto& v : data) v = get_f32(in, "tensor payload");
  }
}

std::vector<std::uint32_t> to_dims(const Shape& shape) {
  std::vector<std::uint32_t> dims;
  for (auto d : shape) dims.push_back(static_cast<std::uint32_t>(d));
  return dims;
}

}  // namespace

void write_lstf(std::ostream& out, std::span<const std::uint32_t> dims, std::span<const float> data) {
  if (dims.empty() || dims.size() > 255) throw InvalidArgument("LSTF rank must be in [1, 255]");
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  if (n != data.size()) throw InvalidArgument("LSTF payload length does not match dims");
  out.write(kLstfMagic.data(), 4);
  put_le<std::uint8_t>(out, kLstfVersion);
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(dims.size()));
  for (auto d : dims) put_le<std::uint32_t>(out, d);
  write_payload(out, data);
}

TensorRecord read_lstf(std::istream& in) {
  expect_magic(in, kLstfMagic);
  const auto version = get_le<std::uint8_t>(in, "LSTF version");
  if (version != kLstfVersion) throw FormatError("unsupported LSTF version " + std::to_string(version));
  const auto rank = get_le<std::uint8_t>(in, "LSTF rank");
  if (rank == 0) throw FormatError("LSTF rank must be at least 1");
  TensorRecord rec;
  std::uint64_t n = 1;
  for (int i = 0; i < rank; ++i) {
    rec.dims.push_back(get_le<std::uint32_t>(in, "LSTF dims"));
    n *= rec.dims.back();
    if (n > (std::uint64_t{1} << 34)) throw FormatError("LSTF tensor implausibly large");
  }
  rec.data.resize(static_cast<std::size_t>(n));
  read_payload(in, rec.data);
  return rec;
}

void save_lstf(const std::string& path, std::span<const std::uint32_t> dims, std::span<const float> data) {
  auto out = open_out(path);
  write_lstf(out, dims, data);
  finish(out, path);
}

TensorRecord load_lstf(const std::string& path) {
  auto in = open_in(path);
  auto rec = read_lstf(in);
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after LSTF record: " + path);
  return rec;
}

void save_points(const std::string& path, std::span<const Point3> points) {
  auto out = open_out(path);
  out.write(kLspcMagic.data(), 4);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(points.size()));
  for (const auto& p : points) {
    put_f32(out, p.x);
    put_f32(out, p.y);
    put_f32(out, p.z);
  }
  finish(out, path);
}

std::vector<Point3> load_points(const std::string& path) {
  auto in = open_in(path);
  expect_magic(in, kLspcMagic);
  const auto count = get_le<std::uint32_t>(in, "LSPC count");
  std::vector<Point3> points;
  points.reserve(std::min<std::uint32_t>(count, 1u << 24));
  for (std::uint32_t i = 0; i < count; ++i) {
    Point3 p;
    p.x = get_f32(in, "LSPC point");
    p.y = get_f32(in, "LSPC point");
    p.z = get_f32(in, "LSPC point");
    points.push_back(p);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after LSPC points: " + path);
  return points;
}

void save_raster(const std::string& path, const PolarRaster& raster) {
  const std::array<std::uint32_t, 2> dims{static_cast<std::uint32_t>(raster.rows()), static_cast<std::uint32_t>(raster.cols())};
  save_lstf(path, dims, raster.data());
}

PolarRaster load_raster(const std::string& path, const GridSpec& grid) {
  auto rec = load_lstf(path);
  if (rec.dims.size() != 2 || rec.dims[0] != grid.n_rows() || rec.dims[1] != grid.n_cols()) {
    throw FormatError("raster " + path + " does not match the grid (" + std::to_string(grid.n_rows()) + "x" +
                      std::to_string(grid.n_cols()) + ")");
  }
  try {
    return PolarRaster(grid, std::move(rec.data));
  } catch (const InvalidArgument& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void save_checkpoint(const std::string& path, const Config& config, const ParamStore& params, bool with_adam) {
  auto out = open_out(path);
  out.write(kLsckMagic.data(), 4);
  put_le<std::uint8_t>(out, kLsckVersion);
  const std::string text = to_text(config);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));

  struct Item {
    std::string name;
    std::vector<std::uint32_t> dims;
    std::span<const float> data;
    std::vector<float> owned;
  };
  std::vector<Item> items;
  for (const auto& e : params.entries()) items.push_back({e.name, to_dims(e.value.shape()), e.value.values(), {}});
  if (with_adam) {
    for (const auto& e : params.entries()) {
      if (e.adam.step == 0) continue;
      const auto dims = to_dims(e.value.shape());
      items.push_back({std::string(kAdamM) + e.name, dims, e.adam.m, {}});
      items.push_back({std::string(kAdamV) + e.name, dims, e.adam.v, {}});
      items.push_back({std::string(kAdamStep) + e.name, {1}, {}, {static_cast<float>(e.adam.step)}});
    }
  }
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(items.size()));
  for (const auto& item : items) {
    if (item.name.size() > 0xFFFF) throw InvalidArgument("parameter name too long: " + item.name);
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(item.name.size()));
    out.write(item.name.data(), static_cast<std::streamsize>(item.name.size()));
    write_lstf(out, item.dims, item.owned.empty() ? item.data : std::span<const float>(item.owned));
  }
  finish(out, path);
}

Checkpoint load_checkpoint(const std::string& path, const Config* expected, bool force) {
  auto in = open_in(path);
  expect_magic(in, kLsckMagic);
  const auto version = get_le<std::uint8_t>(in, "LSCK version");
  if (version != kLsckVersion) throw FormatError("unsupported LSCK version " + std::to_string(version));
  const auto text_len = get_le<std::uint32_t>(in, "LSCK config length");
  std::string text(text_len, '\0');
  if (!in.read(text.data(), text_len)) throw FormatError("truncated checkpoint config");
  Config config = parse_config(text);
  if (expected && !force && model_signature(*expected) != model_signature(config)) {
    throw FormatError("checkpoint " + path + " was written for a different model config (use --force to load anyway)");
  }

  const auto count = get_le<std::uint32_t>(in, "LSCK tensor count");
  ParamStore params;
  struct Pending {
    std::string name;
    TensorRecord rec;
  };
  std::vector<Pending> adam;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = get_le<std::uint16_t>(in, "LSCK name length");
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw FormatError("truncated checkpoint tensor name");
    auto rec = read_lstf(in);
    if (name.starts_with("adam.")) {
      adam.push_back({std::move(name), std::move(rec)});
      continue;
    }
    Shape shape(rec.dims.begin(), rec.dims.end());
    try {
      params.add(name, Tensor::from(std::move(shape), std::move(rec.data)), ParamKind::trainable);
    } catch (const InvalidArgument& e) {
      throw FormatError("checkpoint tensor " + name + ": " + e.what());
    }
  }
  for (auto& p : adam) {
    auto take = [&](std::string_view prefix) -> ParamEntry* {
      if (!p.name.starts_with(prefix)) return nullptr;
      const std::string target = p.name.substr(prefix.size());
      if (!params.contains(target)) throw FormatError("Adam state for unknown parameter " + target);
      return &params.entry(target);
    };
    if (auto* e = take(kAdamM)) {
      if (p.rec.data.size() != e->value.numel()) throw FormatError("Adam moment size mismatch for " + e->name);
      e->adam.m = std::move(p.rec.data);
    } else if (auto* e2 = take(kAdamV)) {
      if (p.rec.data.size() != e2->value.numel()) throw FormatError("Adam moment size mismatch for " + e2->name);
      e2->adam.v = std::move(p.rec.data);
    } else if (auto* e3 = take(kAdamStep)) {
      if (p.rec.data.size() != 1) throw FormatError("Adam step record must hold one value");
      e3->adam.step = static_cast<std::uint64_t>(p.rec.data[0]);
    } else {
      throw FormatError("unrecognized checkpoint record " + p.name);
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after checkpoint: " + path);
  return Checkpoint{std::move(config), std::move(params)};
}

std::vector<std::uint8_t> render_pgm(std::size_t rows, std::size_t cols, std::span<const float> data) {
  if (rows == 0 || cols == 0 || data.size() != rows * cols) throw InvalidArgument("render_pgm: data does not match rows x cols");
  const std::string header = "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  const auto [lo_it, hi_it] = std::minmax_element(data.begin(), data.end());
  const float lo = *lo_it;
  const float hi = *hi_it;
  for (std::size_t r = rows; r-- > 0;) {
    for (std::size_t c = 0; c < cols; ++c) {
      const float v = data[r * cols + c];
      std::uint8_t px = 0;
      if (hi > lo) px = static_cast<std::uint8_t>(std::lround(255.0 * (double(v) - lo) / (double(hi) - lo)));
      else if (hi > 0.0f) px = 128;
      bytes.push_back(px);
    }
  }
  return bytes;
}

std::vector<std::uint8_t> render_pgm(const PolarRaster& raster) { return render_pgm(raster.rows(), raster.cols(), raster.data()); }

void save_pgm(const std::string& path, std::size_t rows, std::size_t cols, std::span<const float> data) {
  const auto bytes = render_pgm(rows, cols, data);
  auto out = open_out(path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  finish(out, path);
}

void save_pgm(const std::string& path, const PolarRaster& raster) { save_pgm(path, raster.rows(), raster.cols(), raster.data()); }

}  // namespace lidarsynth
