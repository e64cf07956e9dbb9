// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#pragma once

#include <cstddef>
#include <vector>

namespace lidarsynth {

/// Single-channel float image, row-major, row 0 at the top.
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> data;

  Image() = default;
  Image(std::size_t h, std::size_t w, float fill = 0.0f) : height(h), width(w), data(h * w, fill) {}

  float& at(std::size_t row, std::size_t col) { return data[row * width + col]; }
  float at(std::size_t row, std::size_t col) const { return data[row * width + col]; }

  friend bool operator==(const Image&, const Image&) = default;
};

}  // namespace lidarsynth
