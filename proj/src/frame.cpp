/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include "trivid/frame.hpp"

#include "trivid/error.hpp"

namespace trivid {

Frame Frame::filled(int width, int height, std::array<uint8_t, 3> rgb,
                    int index) {
  require(width > 0 && height > 0, "frame dimensions must be positive");
  Frame f;
  f.width = width;
  f.height = height;
  f.index = index;
  f.data.resize(static_cast<size_t>(kChannels) * width * height);
  for (int p = 0; p < kChannels; ++p) {
    auto begin = f.data.begin() + static_cast<ptrdiff_t>(p) * f.plane_size();
    std::fill(begin, begin + static_cast<ptrdiff_t>(f.plane_size()), rgb[p]);
  }
  return f;
}

void Frame::validate() const {
  require(width > 0 && height > 0, "frame dimensions must be positive");
  require(data.size() == static_cast<size_t>(kChannels) * plane_size(),
          "frame buffer size does not match dimensions");
}

void VideoSequence::validate() const {
  require(fps > 0.0, "fps must be positive");
  for (const Frame& f : frames) {
    f.validate();
    if (&f != &frames.front()) {
      require(f.width == frames.front().width &&
                  f.height == frames.front().height,
              "all frames in a sequence must share dimensions");
    }
  }
}

GrayPlane rgb_to_gray(const Frame& frame) {
  frame.validate();
  GrayPlane g;
  g.width = frame.width;
  g.height = frame.height;
  g.values.resize(frame.plane_size());
  const uint8_t* r = frame.data.data();
  const uint8_t* gg = r + frame.plane_size();
  const uint8_t* b = gg + frame.plane_size();
  for (size_t i = 0; i < frame.plane_size(); ++i) {
    g.values[i] = static_cast<float>(0.299 * r[i] + 0.587 * gg[i] + 0.114 * b[i]);
  }
  return g;
}

}  // namespace trivid
