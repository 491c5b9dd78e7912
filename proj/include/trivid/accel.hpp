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
#include <map>
#include <string>
#include <vector>

#include "trivid/archive.hpp"
#include "trivid/scenario.hpp"
#include "trivid/spatial.hpp"

namespace trivid::accel {

enum class LayerKind { kConv, kFixed };

// One network layer. Conv layers are costed analytically; fixed layers
// (pooling, elementwise, fully-connected lumped blocks) carry table-supplied
// costs so end-to-end sums stay honest.
struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::kConv;
  int c_in = 1;
  int c_out = 1;
  int k = 3;
  int stride = 1;
  int padding = 0;
  int h = 1;
  int w = 1;
  int h_out = 0;  // derived by finalize()
  int w_out = 0;
  double fixed_gops = 0.0;  // kFixed only
  uint64_t fixed_cycles = 0;
  uint64_t fixed_dram_bytes = 0;

  // h_out = (h + 2*padding - k)/stride + 1 (floor), same for w.
  void finalize();
  void validate() const;
};

// Output-space tile extents; t_c is the channel-load granularity descriptor
// and does not enter the cycle model.
struct TileSpec {
  int t_h = 16;
  int t_w = 16;
  int t_c = 0;  // 0 = all channels per load
};

// One scheduled tile: output cell range plus the clamped input footprint
// including the halo.
struct Tile {
  int r0 = 0, r1 = 0;  // output rows [r0, r1)
  int c0 = 0, c1 = 0;  // output cols [c0, c1)
  int ir0 = 0, ir1 = 0;  // input rows touched
  int ic0 = 0, ic1 = 0;

  int64_t out_cells() const {
    return static_cast<int64_t>(r1 - r0) * (c1 - c0);
  }
  int64_t in_cells() const {
    return static_cast<int64_t>(ir1 - ir0) * (ic1 - ic0);
  }
};

struct DeviceSpec {
  std::string name = "device";
  double clock_hz = 300e6;
  int dsp_count = 9024;
  double peak_gops = 2256.0;
  double e_mac_j = 4.6e-12;
  double e_dram_byte_j = 160e-12;
  double board_power_w = 0.0;  // 0 = no measured override
  int filters_in_parallel = 1;

  void validate() const;
};

struct LayerCost {
  std::string name;
  uint64_t cycles = 0;
  double latency_s = 0.0;
  uint64_t macs = 0;
  uint64_t dram_bytes = 0;
  double energy_j = 0.0;
  int tiles_total = 0;
  int tiles_skipped = 0;
};

// Input-channel view of a weight mask for the channel-sequential engine.
// A kernel row is counted as nonzero when any filter keeps a weight in it;
// nnz_per_channel sums kept weights across all filters.
struct LayerSparsity {
  std::vector<uint8_t> channel_kept;
  std::vector<int> rows_nonzero;
  std::vector<int64_t> nnz_per_channel;

  void validate(const LayerSpec& layer) const;
};

LayerSparsity dense_sparsity(const LayerSpec& layer);
LayerSparsity channel_sparsity(const LayerSpec& layer,
                               const std::vector<uint8_t>& kept);
LayerSparsity sparsity_from_mask_entry(const LayerSpec& layer,
                                       const MaskEntry& entry);

// 2 * h_out * w_out * c_out * c_in * k^2 / 1e9 for conv layers; fixed
// layers report their table cost.
double layer_gops(const LayerSpec& layer);

// Non-overlapping output tiling; every output cell appears exactly once.
std::vector<Tile> tile_schedule(const LayerSpec& layer, const TileSpec& tile);

// Row-parallel channel-sequential model: each kept channel costs
// ceil(out_rows * rows_nonzero/k) cycles per filter group.
uint64_t tile_cycles(const LayerSpec& layer, const Tile& tile,
                     const LayerSparsity& sparsity,
                     int filters_in_parallel = 1);

// Full layer cost. A tile is skipped (zero cycles, zero bytes) when the
// feature mask drops every output cell it covers; weights are loaded once
// per layer when at least one tile runs.
LayerCost layer_cost(const LayerSpec& layer, const TileSpec& tile_spec,
                     const DeviceSpec& device,
                     const spatial::FeatureMask* feature_mask = nullptr,
                     const LayerSparsity* sparsity = nullptr);

// total_gops / peak_gops: the compute-bound latency floor.
double roofline_bound(double total_gops, const DeviceSpec& device);

struct ModelCost {
  std::vector<LayerCost> layers;
  LayerCost total;
  double gops_dense = 0.0;
  double gops_effective = 0.0;  // 2 * total.macs / 1e9
};

// Per-layer masks and sparsity are looked up by layer name; absent entries
// mean dense.
ModelCost model_cost(
    const std::vector<LayerSpec>& layers, const TileSpec& tile_spec,
    const DeviceSpec& device,
    const std::map<std::string, spatial::FeatureMask>& feature_masks = {},
    const std::map<std::string, LayerSparsity>& sparsity = {});

std::vector<LayerSpec> layer_table_from_json(const Json& j);
Json layer_table_to_json(const std::vector<LayerSpec>& layers);
std::vector<LayerSpec> load_layer_table(const std::filesystem::path& path);

DeviceSpec device_from_json(const Json& j);
Json device_to_json(const DeviceSpec& device);

}  // namespace trivid::accel
