/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include "trivid/accel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "trivid/error.hpp"

namespace trivid::accel {

namespace {

constexpr int kBytesPerValue = 4;

uint64_t ceil_div(uint64_t a, uint64_t b) { return (a + b - 1) / b; }

}  // namespace

void LayerSpec::finalize() {
  if (kind == LayerKind::kConv) {
    h_out = (h + 2 * padding - k) / stride + 1;
    w_out = (w + 2 * padding - k) / stride + 1;
  }
}

void LayerSpec::validate() const {
  require(!name.empty(), "layer name must not be empty");
  if (kind == LayerKind::kFixed) {
    require(fixed_gops >= 0.0 && std::isfinite(fixed_gops),
            "fixed layer cost must be finite and >= 0");
    return;
  }
  require(c_in >= 1 && c_out >= 1, "channel counts must be >= 1");
  require(k >= 1 && stride >= 1 && padding >= 0,
          "kernel, stride and padding must be valid");
  require(h >= 1 && w >= 1, "input dims must be >= 1");
  require(h + 2 * padding >= k && w + 2 * padding >= k,
          "kernel must fit the padded input");
  require(h_out == (h + 2 * padding - k) / stride + 1 &&
              w_out == (w + 2 * padding - k) / stride + 1,
          "output dims must match the conv arithmetic");
  require(h_out >= 1 && w_out >= 1, "output dims must be >= 1");
}

void DeviceSpec::validate() const {
  require(clock_hz > 0.0, "clock must be positive");
  require(dsp_count > 0, "dsp count must be positive");
  require(peak_gops > 0.0, "peak throughput must be positive");
  require(e_mac_j >= 0.0 && e_dram_byte_j >= 0.0,
          "energy constants must be >= 0");
  require(board_power_w >= 0.0, "board power must be >= 0");
  require(filters_in_parallel >= 1, "filter parallelism must be >= 1");
}

void LayerSparsity::validate(const LayerSpec& layer) const {
  size_t c = static_cast<size_t>(layer.c_in);
  require(channel_kept.size() == c && rows_nonzero.size() == c &&
              nnz_per_channel.size() == c,
          "sparsity vectors must have one slot per input channel");
  for (size_t i = 0; i < c; ++i) {
    require(rows_nonzero[i] >= 0 && rows_nonzero[i] <= layer.k,
            "nonzero row counts must lie in [0, k]");
    require(nnz_per_channel[i] >= 0 &&
                nnz_per_channel[i] <=
                    static_cast<int64_t>(layer.c_out) * layer.k * layer.k,
            "per-channel nnz must fit the filter bank");
  }
}

LayerSparsity dense_sparsity(const LayerSpec& layer) {
  LayerSparsity s;
  s.channel_kept.assign(static_cast<size_t>(layer.c_in), 1);
  s.rows_nonzero.assign(static_cast<size_t>(layer.c_in), layer.k);
  s.nnz_per_channel.assign(
      static_cast<size_t>(layer.c_in),
      static_cast<int64_t>(layer.c_out) * layer.k * layer.k);
  return s;
}

LayerSparsity channel_sparsity(const LayerSpec& layer,
                               const std::vector<uint8_t>& kept) {
  require(kept.size() == static_cast<size_t>(layer.c_in),
          "channel mask must have one bit per input channel");
  LayerSparsity s = dense_sparsity(layer);
  for (size_t i = 0; i < kept.size(); ++i) {
    if (kept[i]) continue;
    s.channel_kept[i] = 0;
    s.rows_nonzero[i] = 0;
    s.nnz_per_channel[i] = 0;
  }
  return s;
}

LayerSparsity sparsity_from_mask_entry(const LayerSpec& layer,
                                       const MaskEntry& entry) {
  require(entry.shape.size() == 4, "weight mask must be a 4-D conv mask");
  require(entry.shape[0] == static_cast<uint32_t>(layer.c_out) &&
              entry.shape[1] == static_cast<uint32_t>(layer.c_in) &&
              entry.shape[2] == static_cast<uint32_t>(layer.k) &&
              entry.shape[3] == static_cast<uint32_t>(layer.k),
          "weight mask shape must match the layer");
  size_t kk = static_cast<size_t>(layer.k) * layer.k;
  LayerSparsity s;
  s.channel_kept.assign(static_cast<size_t>(layer.c_in), 0);
  s.rows_nonzero.assign(static_cast<size_t>(layer.c_in), 0);
  s.nnz_per_channel.assign(static_cast<size_t>(layer.c_in), 0);
  for (int ci = 0; ci < layer.c_in; ++ci) {
    std::vector<uint8_t> row_used(static_cast<size_t>(layer.k), 0);
    int64_t nnz = 0;
    for (int co = 0; co < layer.c_out; ++co) {
      size_t base =
          (static_cast<size_t>(co) * layer.c_in + static_cast<size_t>(ci)) *
          kk;
      for (int r = 0; r < layer.k; ++r) {
        for (int c = 0; c < layer.k; ++c) {
          if (!entry.bits[base + static_cast<size_t>(r) * layer.k + c]) {
            continue;
          }
          row_used[static_cast<size_t>(r)] = 1;
          ++nnz;
        }
      }
    }
    int rows = 0;
    for (uint8_t u : row_used) rows += u ? 1 : 0;
    s.channel_kept[static_cast<size_t>(ci)] = nnz > 0 ? 1 : 0;
    s.rows_nonzero[static_cast<size_t>(ci)] = rows;
    s.nnz_per_channel[static_cast<size_t>(ci)] = nnz;
  }
  return s;
}

double layer_gops(const LayerSpec& layer) {
  layer.validate();
  if (layer.kind == LayerKind::kFixed) return layer.fixed_gops;
  return 2.0 * layer.h_out * layer.w_out * layer.c_out * layer.c_in *
         layer.k * layer.k / 1e9;
}

std::vector<Tile> tile_schedule(const LayerSpec& layer,
                                const TileSpec& tile) {
  layer.validate();
  require(layer.kind == LayerKind::kConv,
          "only conv layers are tile-scheduled");
  require(tile.t_h >= 1 && tile.t_w >= 1, "tile dims must be >= 1");
  std::vector<Tile> out;
  for (int r0 = 0; r0 < layer.h_out; r0 += tile.t_h) {
    int r1 = std::min(r0 + tile.t_h, layer.h_out);
    for (int c0 = 0; c0 < layer.w_out; c0 += tile.t_w) {
      int c1 = std::min(c0 + tile.t_w, layer.w_out);
      Tile t;
      t.r0 = r0;
      t.r1 = r1;
      t.c0 = c0;
      t.c1 = c1;
      t.ir0 = std::max(0, r0 * layer.stride - layer.padding);
      t.ir1 = std::min(layer.h,
                       (r1 - 1) * layer.stride - layer.padding + layer.k);
      t.ic0 = std::max(0, c0 * layer.stride - layer.padding);
      t.ic1 = std::min(layer.w,
                       (c1 - 1) * layer.stride - layer.padding + layer.k);
      out.push_back(t);
    }
  }
  return out;
}

uint64_t tile_cycles(const LayerSpec& layer, const Tile& tile,
                     const LayerSparsity& sparsity, int filters_in_parallel) {
  require(filters_in_parallel >= 1, "filter parallelism must be >= 1");
  sparsity.validate(layer);
  uint64_t rows = static_cast<uint64_t>(tile.r1 - tile.r0);
  uint64_t per_group = 0;
  for (int c = 0; c < layer.c_in; ++c) {
    if (!sparsity.channel_kept[static_cast<size_t>(c)]) continue;
    per_group += ceil_div(
        rows * static_cast<uint64_t>(
                   sparsity.rows_nonzero[static_cast<size_t>(c)]),
        static_cast<uint64_t>(layer.k));
  }
  uint64_t groups = ceil_div(static_cast<uint64_t>(layer.c_out),
                             static_cast<uint64_t>(filters_in_parallel));
  return per_group * groups;
}

LayerCost layer_cost(const LayerSpec& layer, const TileSpec& tile_spec,
                     const DeviceSpec& device,
                     const spatial::FeatureMask* feature_mask,
                     const LayerSparsity* sparsity) {
  layer.validate();
  device.validate();
  LayerCost cost;
  cost.name = layer.name;
  if (layer.kind == LayerKind::kFixed) {
    cost.cycles = layer.fixed_cycles;
    cost.latency_s = static_cast<double>(cost.cycles) / device.clock_hz;
    cost.macs = static_cast<uint64_t>(std::llround(layer.fixed_gops * 1e9 / 2.0));
    cost.dram_bytes = layer.fixed_dram_bytes;
    cost.energy_j = device.e_mac_j * static_cast<double>(cost.macs) +
                    device.e_dram_byte_j * static_cast<double>(cost.dram_bytes);
    return cost;
  }

  if (feature_mask != nullptr) {
    require(feature_mask->height == layer.h_out &&
                feature_mask->width == layer.w_out,
            "feature mask dims must match the layer output");
  }
  LayerSparsity dense;
  if (sparsity == nullptr) {
    dense = dense_sparsity(layer);
    sparsity = &dense;
  } else {
    sparsity->validate(layer);
  }

  int64_t kept_channels = 0;
  int64_t nnz_total = 0;
  for (int c = 0; c < layer.c_in; ++c) {
    if (sparsity->channel_kept[static_cast<size_t>(c)]) ++kept_channels;
    nnz_total += sparsity->nnz_per_channel[static_cast<size_t>(c)];
  }

  std::vector<Tile> tiles = tile_schedule(layer, tile_spec);
  cost.tiles_total = static_cast<int>(tiles.size());
  for (const Tile& t : tiles) {
    bool all_dropped = feature_mask != nullptr;
    if (feature_mask != nullptr) {
      for (int r = t.r0; r < t.r1 && all_dropped; ++r) {
        for (int c = t.c0; c < t.c1; ++c) {
          if (feature_mask->cell_kept(r, c)) {
            all_dropped = false;
            break;
          }
        }
      }
    }
    if (all_dropped) {
      ++cost.tiles_skipped;
      continue;
    }
    cost.cycles +=
        tile_cycles(layer, t, *sparsity, device.filters_in_parallel);
    cost.macs += static_cast<uint64_t>(t.out_cells()) *
                 static_cast<uint64_t>(nnz_total);
    uint64_t in_bytes = static_cast<uint64_t>(t.in_cells()) *
                        static_cast<uint64_t>(kept_channels) * kBytesPerValue;
    uint64_t out_bytes = static_cast<uint64_t>(t.out_cells()) *
                         static_cast<uint64_t>(layer.c_out) * kBytesPerValue;
    cost.dram_bytes += in_bytes + out_bytes;
  }
  if (cost.tiles_skipped < cost.tiles_total) {
    cost.dram_bytes += static_cast<uint64_t>(nnz_total) * kBytesPerValue;
  }
  cost.latency_s = static_cast<double>(cost.cycles) / device.clock_hz;
  cost.energy_j = device.e_mac_j * static_cast<double>(cost.macs) +
                  device.e_dram_byte_j * static_cast<double>(cost.dram_bytes);
  return cost;
}

double roofline_bound(double total_gops, const DeviceSpec& device) {
  device.validate();
  require(total_gops >= 0.0, "workload must be >= 0");
  return total_gops / device.peak_gops;
}

ModelCost model_cost(const std::vector<LayerSpec>& layers,
                     const TileSpec& tile_spec, const DeviceSpec& device,
                     const std::map<std::string, spatial::FeatureMask>&
                         feature_masks,
                     const std::map<std::string, LayerSparsity>& sparsity) {
  ModelCost out;
  out.total.name = "total";
  for (const LayerSpec& layer : layers) {
    auto fm = feature_masks.find(layer.name);
    auto sp = sparsity.find(layer.name);
    LayerCost c = layer_cost(
        layer, tile_spec, device,
        fm == feature_masks.end() ? nullptr : &fm->second,
        sp == sparsity.end() ? nullptr : &sp->second);
    out.total.cycles += c.cycles;
    out.total.latency_s += c.latency_s;
    out.total.macs += c.macs;
    out.total.dram_bytes += c.dram_bytes;
    out.total.energy_j += c.energy_j;
    out.total.tiles_total += c.tiles_total;
    out.total.tiles_skipped += c.tiles_skipped;
    out.gops_dense += layer_gops(layer);
    out.layers.push_back(std::move(c));
  }
  out.gops_effective = 2.0 * static_cast<double>(out.total.macs) / 1e9;
  return out;
}

std::vector<LayerSpec> layer_table_from_json(const Json& j) {
  try {
    std::vector<LayerSpec> out;
    for (const auto& item : j.at("layers")) {
      LayerSpec layer;
      layer.name = item.at("name").get<std::string>();
      std::string kind = item.value("kind", std::string("conv"));
      if (kind == "conv") {
        layer.kind = LayerKind::kConv;
        layer.c_in = item.at("c_in").get<int>();
        layer.c_out = item.at("c_out").get<int>();
        layer.k = item.at("k").get<int>();
        layer.stride = item.value("stride", 1);
        layer.padding = item.value("padding", 0);
        layer.h = item.at("h").get<int>();
        layer.w = item.at("w").get<int>();
        layer.finalize();
      } else if (kind == "fixed") {
        layer.kind = LayerKind::kFixed;
        layer.fixed_gops = item.value("gops", 0.0);
        layer.fixed_cycles = item.value("cycles", static_cast<uint64_t>(0));
        layer.fixed_dram_bytes =
            item.value("dram_bytes", static_cast<uint64_t>(0));
      } else {
        throw FormatError("unknown layer kind: " + kind);
      }
      layer.validate();
      out.push_back(std::move(layer));
    }
    if (out.empty()) throw FormatError("layer table is empty");
    return out;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed layer table JSON: ") + e.what());
  }
}

Json layer_table_to_json(const std::vector<LayerSpec>& layers) {
  Json arr = Json::array();
  for (const LayerSpec& layer : layers) {
    Json item;
    item["name"] = layer.name;
    if (layer.kind == LayerKind::kConv) {
      item["kind"] = "conv";
      item["c_in"] = layer.c_in;
      item["c_out"] = layer.c_out;
      item["k"] = layer.k;
      item["stride"] = layer.stride;
      item["padding"] = layer.padding;
      item["h"] = layer.h;
      item["w"] = layer.w;
    } else {
      item["kind"] = "fixed";
      item["gops"] = layer.fixed_gops;
      item["cycles"] = layer.fixed_cycles;
      item["dram_bytes"] = layer.fixed_dram_bytes;
    }
    arr.push_back(std::move(item));
  }
  Json j;
  j["layers"] = std::move(arr);
  return j;
}

std::vector<LayerSpec> load_layer_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open layer table: " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed layer table JSON: ") + e.what());
  }
  return layer_table_from_json(j);
}

DeviceSpec device_from_json(const Json& j) {
  try {
    DeviceSpec d;
    d.name = j.value("name", d.name);
    d.clock_hz = j.value("clock_hz", d.clock_hz);
    d.dsp_count = j.value("dsp_count", d.dsp_count);
    d.peak_gops = j.value("peak_gops", d.peak_gops);
    d.e_mac_j = j.value("e_mac_j", d.e_mac_j);
    d.e_dram_byte_j = j.value("e_dram_byte_j", d.e_dram_byte_j);
    d.board_power_w = j.value("board_power_w", d.board_power_w);
    d.filters_in_parallel = j.value("filters_in_parallel",
                                    d.filters_in_parallel);
    d.validate();
    return d;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed device JSON: ") + e.what());
  }
}

Json device_to_json(const DeviceSpec& device) {
  Json j;
  j["name"] = device.name;
  j["clock_hz"] = device.clock_hz;
  j["dsp_count"] = device.dsp_count;
  j["peak_gops"] = device.peak_gops;
  j["e_mac_j"] = device.e_mac_j;
  j["e_dram_byte_j"] = device.e_dram_byte_j;
  j["board_power_w"] = device.board_power_w;
  j["filters_in_parallel"] = device.filters_in_parallel;
  return j;
}

}  // namespace trivid::accel
