/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace trivid {

// Planar 8-bit RGB frame. data holds kChannels planes of width*height bytes.
struct Frame {
  static constexpr int kChannels = 3;

  int width = 0;
  int height = 0;
  int index = 0;
  std::vector<uint8_t> data;

  static Frame filled(int width, int height, std::array<uint8_t, 3> rgb,
                      int index = 0);

  size_t plane_size() const {
    return static_cast<size_t>(width) * static_cast<size_t>(height);
  }

  uint8_t at(int plane, int x, int y) const {
    return data[plane * plane_size() + static_cast<size_t>(y) * width + x];
  }

  uint8_t& at(int plane, int x, int y) {
    return data[plane * plane_size() + static_cast<size_t>(y) * width + x];
  }

  void validate() const;
};

struct VideoSequence {
  std::vector<Frame> frames;
  double fps = 30.0;

  void validate() const;
};

// Single-channel float plane, row-major.
struct GrayPlane {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  float at(int x, int y) const {
    return values[static_cast<size_t>(y) * width + x];
  }

  float& at(int x, int y) {
    return values[static_cast<size_t>(y) * width + x];
  }
};

// BT.601 luma: 0.299 R + 0.587 G + 0.114 B.
GrayPlane rgb_to_gray(const Frame& frame);

}  // namespace trivid
