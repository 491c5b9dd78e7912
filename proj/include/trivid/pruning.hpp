/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "trivid/archive.hpp"
#include "trivid/scenario.hpp"

namespace trivid::pruning {

// K x K keep bits, row-major.
struct Pattern {
  int k = 3;
  std::vector<uint8_t> bits;

  int nnz() const;
  std::string bit_string() const;  // '1' = kept, row-major
};

struct PatternLibrary {
  int k = 3;
  int target_nnz = 4;
  std::vector<Pattern> patterns;

  void validate() const;
};

struct MaskStats {
  double pruning_ratio = 0.0;        // pruned / total over the final mask
  double sparse_kernel_ratio = 0.0;  // of the pre-pattern magnitude mask
  std::vector<std::pair<std::string, size_t>> kept_per_tensor;
  std::vector<int64_t> pattern_histogram;  // assignments per library slot
};

// Zeroes the floor(total * ratio) smallest-magnitude weights across all
// tensors jointly. Ties break on (tensor index, flat index) ascending.
PruneMask global_magnitude_mask(const WeightArchive& archive, double ratio);

// May return retrained weights for the kept positions; shapes must match.
using RetrainCallback = std::function<WeightArchive(const WeightArchive&)>;

WeightArchive identity_retrain(const WeightArchive& archive);

struct IterativeResult {
  PruneMask mask;
  WeightArchive weights;  // after the last in-loop retrain, masked
};

// Magnitude pruning over a geometric schedule: after round t of T the
// cumulative ratio is 1 - (1-ratio)^(t/T). Each round removes only
// still-kept weights, ranked by the current (possibly retrained)
// magnitudes; the callback runs between rounds on the masked archive.
IterativeResult iterative_magnitude_prune_with_weights(
    const WeightArchive& archive, double ratio, int rounds,
    const RetrainCallback& retrain = identity_retrain);
PruneMask iterative_magnitude_prune(
    const WeightArchive& archive, double ratio, int rounds,
    const RetrainCallback& retrain = identity_retrain);

// All-false exactly on kernels (K x K slices) that are entirely false in
// m_imp; all-true elsewhere. Every tensor must be a 4-D conv tensor.
PruneMask extract_kernel_mask(const PruneMask& m_imp);

// Pruned weights living in fully-pruned kernels, over all pruned weights.
double sparse_kernel_ratio(const PruneMask& m_imp);

// Most frequent top-target_nnz magnitude shapes among kernels that survive
// kernel_mask, using m_imp-masked magnitudes. Frequency ties break on
// lexicographic bit order; missing slots are padded with the unused shapes
// covering the most magnitude.
PatternLibrary build_pattern_library(const WeightArchive& archive,
                                     const PruneMask& m_imp,
                                     const PruneMask& kernel_mask, int L = 8,
                                     int target_nnz = 4);

struct AssignResult {
  PruneMask mask;  // kernel_mask AND the chosen per-kernel patterns
  std::vector<int64_t> histogram;
};

// Gives every surviving kernel the library pattern with the largest
// retained |w| sum over the raw weights; ties pick the lowest index.
AssignResult assign_patterns_detailed(const WeightArchive& archive,
                                      const PruneMask& kernel_mask,
                                      const PatternLibrary& library);
PruneMask assign_patterns(const WeightArchive& archive,
                          const PruneMask& kernel_mask,
                          const PatternLibrary& library);

// Elementwise w * mask.
WeightArchive apply_mask(const WeightArchive& archive, const PruneMask& mask);

struct HardwareAwareResult {
  PruneMask mask;  // the deployable pattern mask
  MaskStats stats;
  PatternLibrary library;
  WeightArchive weights;  // after the final retrain, masked
};

// Magnitude prune -> extract kernel sparsity -> derive a pattern library ->
// assign patterns, then one final retrain under the fixed mask.
HardwareAwareResult hardware_aware_prune(
    const WeightArchive& archive, double ratio, int rounds, int L = 8,
    int target_nnz = 4, const RetrainCallback& retrain = identity_retrain);

Json pattern_library_to_json(const PatternLibrary& library);
PatternLibrary pattern_library_from_json(const Json& j);

}  // namespace trivid::pruning
