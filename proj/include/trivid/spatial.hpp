/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "trivid/frame.hpp"
#include "trivid/geometry.hpp"
#include "trivid/rng.hpp"
#include "trivid/scenario.hpp"

namespace trivid::spatial {

// Rectangular patch decomposition of a frame. Boundary patches shrink so the
// grid covers the frame exactly. scores/smoothed are row-major.
struct PatchGrid {
  int patch_size = 60;
  int rows = 0;
  int cols = 0;
  int frame_width = 0;
  int frame_height = 0;
  std::vector<double> scores;
  std::vector<double> smoothed;

  int patch_count() const { return rows * cols; }
  // Integer pixel bounds [x0,x1) x [y0,y1) of patch (r,c).
  void patch_bounds(int r, int c, int& x0, int& y0, int& x1, int& y1) const;
};

PatchGrid build_patch_grid(int frame_width, int frame_height,
                           int patch_size = 60);

// Mean of |gx| + |gy| over the valid (interior) pixels of the patch.
// Patches narrower than the 3x3 kernel score 0.
double sobel_saliency(const GrayPlane& patch);
double sobel_saliency(const GrayPlane& plane, int x0, int y0, int w, int h);

// Per-pixel |gx| + |gy| map; border pixels are 0. Diagnostic helper.
GrayPlane sobel_magnitude(const GrayPlane& plane);

void score_patches(PatchGrid& grid, const GrayPlane& gray);

// smoothed[p] = mean of p's score and its existing 4-neighbors' scores.
void smooth_scores(PatchGrid& grid);

// Keep bit per patch, row-major. drop_ratio records the requested ratio.
struct SaliencyMask {
  int patch_size = 60;
  int rows = 0;
  int cols = 0;
  int frame_width = 0;
  int frame_height = 0;
  double drop_ratio = 0.0;
  std::vector<uint8_t> keep;

  int patch_count() const { return rows * cols; }
  int kept_count() const;
};

// Drops exactly floor(count * drop_ratio) lowest-smoothed patches, ties
// resolved toward the lower row-major index.
SaliencyMask build_mask(const PatchGrid& grid, double drop_ratio);

// Random baseline with the same drop count as build_mask would produce.
SaliencyMask random_mask(const PatchGrid& grid, double drop_ratio, Rng& rng);

// Keep bit per feature cell at a layer resolution.
struct FeatureMask {
  std::string layer;
  int height = 0;
  int width = 0;
  std::vector<uint8_t> keep;

  int cell_count() const { return height * width; }
  int kept_count() const;
  double kept_fraction() const;
  bool cell_kept(int r, int c) const {
    return keep[static_cast<size_t>(r) * width + c] != 0;
  }
};

// Projects the patch mask onto a layer grid by footprint area: a feature
// cell is dropped when at least drop_threshold of its pixel footprint falls
// in dropped patches.
FeatureMask interpolate_mask(const SaliencyMask& mask, int layer_height,
                             int layer_width, double drop_threshold = 1.0,
                             const std::string& layer_name = "");

struct LayerDims {
  std::string name;
  int height = 0;
  int width = 0;
};

// Kept-cell fraction per layer after interpolation.
std::vector<std::pair<std::string, double>> dropped_fraction_per_layer(
    const SaliencyMask& mask, const std::vector<LayerDims>& layers,
    double drop_threshold = 1.0);

// Fraction of the box area covered by kept patches.
double kept_area_fraction(const SaliencyMask& mask, const Box& box);

// Detections whose kept-area fraction falls below min_keep_fraction are
// removed, modeling regions that were never processed.
std::vector<std::vector<Box>> filter_detections(
    const std::vector<std::vector<Box>>& detections_per_frame,
    const std::vector<SaliencyMask>& mask_per_frame,
    double min_keep_fraction);

Json saliency_mask_to_json(const SaliencyMask& mask);
SaliencyMask saliency_mask_from_json(const Json& j);

}  // namespace trivid::spatial
