/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include "trivid/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trivid/error.hpp"

namespace trivid::spatial {

namespace {

constexpr double kFloorGuard = 1e-9;
constexpr double kThresholdGuard = 1e-12;

int drop_count(int patches, double ratio) {
  require(ratio >= 0.0 && ratio < 1.0, "drop ratio must lie in [0,1)");
  return static_cast<int>(std::floor(patches * ratio + kFloorGuard));
}

}  // namespace

void PatchGrid::patch_bounds(int r, int c, int& x0, int& y0, int& x1,
                             int& y1) const {
  x0 = c * patch_size;
  y0 = r * patch_size;
  x1 = std::min((c + 1) * patch_size, frame_width);
  y1 = std::min((r + 1) * patch_size, frame_height);
}

PatchGrid build_patch_grid(int frame_width, int frame_height, int patch_size) {
  require(frame_width > 0 && frame_height > 0,
          "frame dimensions must be positive");
  if (patch_size < 4) {
    throw ConfigError("patch size must be at least 4");
  }
  PatchGrid g;
  g.patch_size = patch_size;
  g.frame_width = frame_width;
  g.frame_height = frame_height;
  g.cols = (frame_width + patch_size - 1) / patch_size;
  g.rows = (frame_height + patch_size - 1) / patch_size;
  return g;
}

double sobel_saliency(const GrayPlane& plane, int x0, int y0, int w, int h) {
  require(x0 >= 0 && y0 >= 0 && w >= 0 && h >= 0 && x0 + w <= plane.width &&
              y0 + h <= plane.height,
          "patch region out of bounds");
  if (w < 3 || h < 3) return 0.0;
  double acc = 0.0;
  for (int y = y0 + 1; y < y0 + h - 1; ++y) {
    for (int x = x0 + 1; x < x0 + w - 1; ++x) {
      double p00 = plane.at(x - 1, y - 1), p01 = plane.at(x, y - 1),
             p02 = plane.at(x + 1, y - 1);
      double p10 = plane.at(x - 1, y), p12 = plane.at(x + 1, y);
      double p20 = plane.at(x - 1, y + 1), p21 = plane.at(x, y + 1),
             p22 = plane.at(x + 1, y + 1);
      double gx = (p02 + 2.0 * p12 + p22) - (p00 + 2.0 * p10 + p20);
      double gy = (p20 + 2.0 * p21 + p22) - (p00 + 2.0 * p01 + p02);
      acc += std::fabs(gx) + std::fabs(gy);
    }
  }
  return acc / (static_cast<double>(w - 2) * (h - 2));
}

double sobel_saliency(const GrayPlane& patch) {
  return sobel_saliency(patch, 0, 0, patch.width, patch.height);
}

GrayPlane sobel_magnitude(const GrayPlane& plane) {
  GrayPlane out;
  out.width = plane.width;
  out.height = plane.height;
  out.values.assign(plane.values.size(), 0.0f);
  for (int y = 1; y + 1 < plane.height; ++y) {
    for (int x = 1; x + 1 < plane.width; ++x) {
      double p00 = plane.at(x - 1, y - 1), p01 = plane.at(x, y - 1),
             p02 = plane.at(x + 1, y - 1);
      double p10 = plane.at(x - 1, y), p12 = plane.at(x + 1, y);
      double p20 = plane.at(x - 1, y + 1), p21 = plane.at(x, y + 1),
             p22 = plane.at(x + 1, y + 1);
      double gx = (p02 + 2.0 * p12 + p22) - (p00 + 2.0 * p10 + p20);
      double gy = (p20 + 2.0 * p21 + p22) - (p00 + 2.0 * p01 + p02);
      out.at(x, y) = static_cast<float>(std::fabs(gx) + std::fabs(gy));
    }
  }
  return out;
}

void score_patches(PatchGrid& grid, const GrayPlane& gray) {
  require(gray.width == grid.frame_width && gray.height == grid.frame_height,
          "gray plane dimensions do not match the grid");
  grid.scores.assign(grid.patch_count(), 0.0);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      int x0, y0, x1, y1;
      grid.patch_bounds(r, c, x0, y0, x1, y1);
      grid.scores[static_cast<size_t>(r) * grid.cols + c] =
          sobel_saliency(gray, x0, y0, x1 - x0, y1 - y0);
    }
  }
}

void smooth_scores(PatchGrid& grid) {
  require(static_cast<int>(grid.scores.size()) == grid.patch_count(),
          "score_patches must run before smooth_scores");
  grid.smoothed.assign(grid.patch_count(), 0.0);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      double sum = grid.scores[static_cast<size_t>(r) * grid.cols + c];
      int terms = 1;
      constexpr int dr[4] = {-1, 1, 0, 0};
      constexpr int dc[4] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        int rr = r + dr[k], cc = c + dc[k];
        if (rr < 0 || rr >= grid.rows || cc < 0 || cc >= grid.cols) continue;
        sum += grid.scores[static_cast<size_t>(rr) * grid.cols + cc];
        ++terms;
      }
      grid.smoothed[static_cast<size_t>(r) * grid.cols + c] = sum / terms;
    }
  }
}

int SaliencyMask::kept_count() const {
  int n = 0;
  for (uint8_t k : keep) n += k ? 1 : 0;
  return n;
}

SaliencyMask build_mask(const PatchGrid& grid, double drop_ratio) {
  require(static_cast<int>(grid.smoothed.size()) == grid.patch_count(),
          "smooth_scores must run before build_mask");
  int m = drop_count(grid.patch_count(), drop_ratio);
  std::vector<int> order(grid.patch_count());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&grid](int a, int b) {
    if (grid.smoothed[a] != grid.smoothed[b]) {
      return grid.smoothed[a] < grid.smoothed[b];
    }
    return a < b;
  });
  SaliencyMask mask;
  mask.patch_size = grid.patch_size;
  mask.rows = grid.rows;
  mask.cols = grid.cols;
  mask.frame_width = grid.frame_width;
  mask.frame_height = grid.frame_height;
  mask.drop_ratio = drop_ratio;
  mask.keep.assign(grid.patch_count(), 1);
  for (int i = 0; i < m; ++i) mask.keep[order[i]] = 0;
  return mask;
}

SaliencyMask random_mask(const PatchGrid& grid, double drop_ratio, Rng& rng) {
  int m = drop_count(grid.patch_count(), drop_ratio);
  std::vector<int> order(grid.patch_count());
  std::iota(order.begin(), order.end(), 0);
  for (int i = 0; i < m; ++i) {
    int j = i + static_cast<int>(rng.below(order.size() - i));
    std::swap(order[i], order[j]);
  }
  SaliencyMask mask;
  mask.patch_size = grid.patch_size;
  mask.rows = grid.rows;
  mask.cols = grid.cols;
  mask.frame_width = grid.frame_width;
  mask.frame_height = grid.frame_height;
  mask.drop_ratio = drop_ratio;
  mask.keep.assign(grid.patch_count(), 1);
  for (int i = 0; i < m; ++i) mask.keep[order[i]] = 0;
  return mask;
}

int FeatureMask::kept_count() const {
  int n = 0;
  for (uint8_t k : keep) n += k ? 1 : 0;
  return n;
}

double FeatureMask::kept_fraction() const {
  if (keep.empty()) return 0.0;
  return static_cast<double>(kept_count()) / static_cast<double>(keep.size());
}

FeatureMask interpolate_mask(const SaliencyMask& mask, int layer_height,
                             int layer_width, double drop_threshold,
                             const std::string& layer_name) {
  require(layer_height >= 1 && layer_width >= 1,
          "layer dimensions must be positive");
  require(drop_threshold > 0.0 && drop_threshold <= 1.0,
          "drop threshold must lie in (0,1]");
  require(static_cast<int>(mask.keep.size()) == mask.patch_count(),
          "mask keep bits do not match its grid");
  FeatureMask out;
  out.layer = layer_name;
  out.height = layer_height;
  out.width = layer_width;
  out.keep.assign(static_cast<size_t>(layer_height) * layer_width, 1);

  double sy = static_cast<double>(mask.frame_height) / layer_height;
  double sx = static_cast<double>(mask.frame_width) / layer_width;
  int ps = mask.patch_size;
  for (int r = 0; r < layer_height; ++r) {
    double fy0 = r * sy;
    double fy1 = (r + 1) * sy;
    int pr0 = std::max(0, static_cast<int>(std::floor(fy0 / ps)));
    int pr1 = std::min(mask.rows,
                       static_cast<int>(std::ceil(fy1 / ps)));
    for (int c = 0; c < layer_width; ++c) {
      double fx0 = c * sx;
      double fx1 = (c + 1) * sx;
      int pc0 = std::max(0, static_cast<int>(std::floor(fx0 / ps)));
      int pc1 = std::min(mask.cols, static_cast<int>(std::ceil(fx1 / ps)));
      double dropped = 0.0;
      for (int pr = pr0; pr < pr1; ++pr) {
        double py0 = pr * static_cast<double>(ps);
        double py1 = std::min<double>((pr + 1) * static_cast<double>(ps),
                                      mask.frame_height);
        double oh = std::min(fy1, py1) - std::max(fy0, py0);
        if (oh <= 0.0) continue;
        for (int pc = pc0; pc < pc1; ++pc) {
          if (mask.keep[static_cast<size_t>(pr) * mask.cols + pc]) continue;
          double px0 = pc * static_cast<double>(ps);
          double px1 = std::min<double>((pc + 1) * static_cast<double>(ps),
                                        mask.frame_width);
          double ow = std::min(fx1, px1) - std::max(fx0, px0);
          if (ow <= 0.0) continue;
          dropped += oh * ow;
        }
      }
      double total = (fy1 - fy0) * (fx1 - fx0);
      if (dropped / total >= drop_threshold - kThresholdGuard) {
        out.keep[static_cast<size_t>(r) * layer_width + c] = 0;
      }
    }
  }
  return out;
}

std::vector<std::pair<std::string, double>> dropped_fraction_per_layer(
    const SaliencyMask& mask, const std::vector<LayerDims>& layers,
    double drop_threshold) {
  std::vector<std::pair<std::string, double>> out;
  out.reserve(layers.size());
  for (const LayerDims& layer : layers) {
    FeatureMask fm = interpolate_mask(mask, layer.height, layer.width,
                                      drop_threshold, layer.name);
    out.emplace_back(layer.name, fm.kept_fraction());
  }
  return out;
}

double kept_area_fraction(const SaliencyMask& mask, const Box& box) {
  require(box.well_formed(), "box must have non-negative extent");
  Box clipped{std::max(box.x1, 0.0), std::max(box.y1, 0.0),
              std::min(box.x2, static_cast<double>(mask.frame_width)),
              std::min(box.y2, static_cast<double>(mask.frame_height))};
  if (clipped.x2 <= clipped.x1 || clipped.y2 <= clipped.y1) return 0.0;
  double total = clipped.area();
  int ps = mask.patch_size;
  int pr0 = std::max(0, static_cast<int>(std::floor(clipped.y1 / ps)));
  int pr1 = std::min(mask.rows, static_cast<int>(std::ceil(clipped.y2 / ps)));
  int pc0 = std::max(0, static_cast<int>(std::floor(clipped.x1 / ps)));
  int pc1 = std::min(mask.cols, static_cast<int>(std::ceil(clipped.x2 / ps)));
  double kept = 0.0;
  for (int pr = pr0; pr < pr1; ++pr) {
    double py0 = pr * static_cast<double>(ps);
    double py1 = std::min<double>((pr + 1) * static_cast<double>(ps),
                                  mask.frame_height);
    double oh = std::min(clipped.y2, py1) - std::max(clipped.y1, py0);
    if (oh <= 0.0) continue;
    for (int pc = pc0; pc < pc1; ++pc) {
      if (!mask.keep[static_cast<size_t>(pr) * mask.cols + pc]) continue;
      double px0 = pc * static_cast<double>(ps);
      double px1 = std::min<double>((pc + 1) * static_cast<double>(ps),
                                    mask.frame_width);
      double ow = std::min(clipped.x2, px1) - std::max(clipped.x1, px0);
      if (ow <= 0.0) continue;
      kept += oh * ow;
    }
  }
  return kept / total;
}

std::vector<std::vector<Box>> filter_detections(
    const std::vector<std::vector<Box>>& detections_per_frame,
    const std::vector<SaliencyMask>& mask_per_frame,
    double min_keep_fraction) {
  require(detections_per_frame.size() == mask_per_frame.size(),
          "one mask per frame is required");
  require(min_keep_fraction > 0.0 && min_keep_fraction <= 1.0,
          "min keep fraction must lie in (0,1]");
  std::vector<std::vector<Box>> out(detections_per_frame.size());
  for (size_t f = 0; f < detections_per_frame.size(); ++f) {
    for (const Box& b : detections_per_frame[f]) {
      if (kept_area_fraction(mask_per_frame[f], b) >= min_keep_fraction) {
        out[f].push_back(b);
      }
    }
  }
  return out;
}

Json saliency_mask_to_json(const SaliencyMask& mask) {
  Json j;
  j["patch_size"] = mask.patch_size;
  j["rows"] = mask.rows;
  j["cols"] = mask.cols;
  j["frame_width"] = mask.frame_width;
  j["frame_height"] = mask.frame_height;
  j["drop_ratio"] = mask.drop_ratio;
  std::string bits(mask.keep.size(), '0');
  for (size_t i = 0; i < mask.keep.size(); ++i) {
    if (mask.keep[i]) bits[i] = '1';
  }
  j["keep"] = bits;
  return j;
}

SaliencyMask saliency_mask_from_json(const Json& j) {
  try {
    SaliencyMask mask;
    mask.patch_size = j.at("patch_size").get<int>();
    mask.rows = j.at("rows").get<int>();
    mask.cols = j.at("cols").get<int>();
    mask.frame_width = j.at("frame_width").get<int>();
    mask.frame_height = j.at("frame_height").get<int>();
    mask.drop_ratio = j.at("drop_ratio").get<double>();
    std::string bits = j.at("keep").get<std::string>();
    if (static_cast<int>(bits.size()) != mask.rows * mask.cols) {
      throw FormatError("mask bitstring length does not match grid dims");
    }
    mask.keep.resize(bits.size());
    for (size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] != '0' && bits[i] != '1') {
        throw FormatError("mask bitstring must contain only 0/1");
      }
      mask.keep[i] = bits[i] == '1' ? 1 : 0;
    }
    return mask;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed mask JSON: ") + e.what());
  }
}

}  // namespace trivid::spatial
