/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace trivid {

// Named dense float tensor. Convolution tensors use the shape
// [filters, channels, k, k] with odd square kernels.
struct WeightTensor {
  std::string name;
  std::vector<uint32_t> shape;
  std::vector<float> values;

  size_t size() const;
  bool is_conv4d() const { return shape.size() == 4 && shape[2] == shape[3]; }
};

struct WeightArchive {
  std::vector<WeightTensor> tensors;

  void validate() const;
  const WeightTensor* find(const std::string& name) const;
  size_t total_size() const;
};

// Per-weight keep bit (1 = keep, 0 = pruned), congruent with a tensor.
struct MaskEntry {
  std::string name;
  std::vector<uint32_t> shape;
  std::vector<uint8_t> bits;

  size_t size() const;
  size_t kept_count() const;
};

struct PruneMask {
  std::vector<MaskEntry> entries;

  void validate() const;
  const MaskEntry* find(const std::string& name) const;
  size_t total_size() const;
  size_t total_kept() const;
};

// Throws ContractError when mask entries do not line up one-to-one with the
// archive tensors in name, order and shape.
void check_congruent(const WeightArchive& archive, const PruneMask& mask);

PruneMask full_mask(const WeightArchive& archive);

// "TRIW": little-endian binary weight container.
//   magic 'TRIW' | u16 version=1 | u32 tensor_count | per tensor:
//   u16 name_len | name bytes | u8 ndim | u32 dims[ndim] | f32 payload.
WeightArchive load_weight_archive(const std::filesystem::path& path);
void save_weight_archive(const WeightArchive& archive,
                         const std::filesystem::path& path);

// "TRIM": same header layout, payload is one bit per weight packed
// row-major, least-significant bit first, padded to whole bytes.
PruneMask load_mask(const std::filesystem::path& path);
void save_mask(const PruneMask& mask, const std::filesystem::path& path);

}  // namespace trivid
