/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include <cmath>
#include <set>

#include "doctest.h"
#include "test_helpers.hpp"
#include "trivid/accel.hpp"
#include "trivid/error.hpp"

using namespace trivid;
using namespace trivid::accel;

namespace {

LayerSpec small_conv() {
  LayerSpec layer;
  layer.name = "conv";
  layer.c_in = 2;
  layer.c_out = 4;
  layer.k = 3;
  layer.stride = 1;
  layer.padding = 1;
  layer.h = 8;
  layer.w = 8;
  layer.finalize();
  return layer;
}

DeviceSpec unit_device() {
  DeviceSpec d;
  d.name = "unit";
  d.clock_hz = 1e6;
  d.dsp_count = 64;
  d.peak_gops = 1.0;
  return d;
}

}  // namespace

TEST_CASE("conv output dims follow the stride arithmetic") {
  LayerSpec layer = small_conv();
  CHECK(layer.h_out == 8);
  CHECK(layer.w_out == 8);

  layer.stride = 2;
  layer.finalize();
  CHECK(layer.h_out == 4);

  LayerSpec bad = small_conv();
  bad.h = 1;
  bad.padding = 0;
  bad.finalize();
  CHECK_THROWS_AS(bad.validate(), ContractError);
}

TEST_CASE("layer gops counts two ops per mac") {
  LayerSpec layer = small_conv();
  // 2 * 8*8 * 4 * 2 * 9 = 9216 ops.
  CHECK(layer_gops(layer) == doctest::Approx(9216.0 / 1e9).epsilon(1e-12));

  LayerSpec fixed;
  fixed.name = "pool";
  fixed.kind = LayerKind::kFixed;
  fixed.fixed_gops = 0.125;
  CHECK(layer_gops(fixed) == 0.125);
}

TEST_CASE("tile schedule covers every output cell exactly once") {
  LayerSpec layer;
  layer.name = "odd";
  layer.c_in = 3;
  layer.c_out = 5;
  layer.k = 3;
  layer.stride = 2;
  layer.padding = 1;
  layer.h = 19;
  layer.w = 13;
  layer.finalize();
  TileSpec tile{4, 3, 0};

  std::vector<Tile> tiles = tile_schedule(layer, tile);
  std::set<std::pair<int, int>> seen;
  for (const Tile& t : tiles) {
    CHECK(t.r0 < t.r1);
    CHECK(t.c0 < t.c1);
    CHECK(t.ir0 >= 0);
    CHECK(t.ir1 <= layer.h);
    CHECK(t.ic0 >= 0);
    CHECK(t.ic1 <= layer.w);
    for (int r = t.r0; r < t.r1; ++r) {
      for (int c = t.c0; c < t.c1; ++c) {
        CHECK(seen.emplace(r, c).second);
      }
    }
  }
  CHECK(seen.size() ==
        static_cast<size_t>(layer.h_out) * static_cast<size_t>(layer.w_out));

  // Interior tiles carry the full halo; border tiles clamp it.
  Tile first = tiles.front();
  CHECK(first.ir0 == 0);  // padding clamps to the input edge
  CHECK(first.ir1 == (first.r1 - 1) * 2 - 1 + 3);
}

TEST_CASE("dense tile cycles follow the row-parallel model") {
  LayerSpec layer = small_conv();
  LayerSparsity dense = dense_sparsity(layer);
  Tile t;
  t.r0 = 0;
  t.r1 = 4;
  t.c0 = 0;
  t.c1 = 4;
  // Per kept channel: ceil(4 rows * 3/3) = 4; 2 channels; 4 filter groups.
  CHECK(tile_cycles(layer, t, dense, 1) == 32);
  CHECK(tile_cycles(layer, t, dense, 2) == 16);
  // fip=3 leaves a ragged group: ceil(4/3) = 2 groups.
  CHECK(tile_cycles(layer, t, dense, 3) == 16);
}

TEST_CASE("dense layer cost matches hand arithmetic") {
  LayerSpec layer = small_conv();
  DeviceSpec device = unit_device();
  TileSpec tile{4, 4, 0};
  LayerCost cost = layer_cost(layer, tile, device);

  CHECK(cost.tiles_total == 4);
  CHECK(cost.tiles_skipped == 0);
  CHECK(cost.cycles == 128);
  CHECK(cost.latency_s == doctest::Approx(128.0 / 1e6));
  CHECK(cost.macs == 4608);  // 8*8 * 4*2*9
  // Each tile reads a 5x5 halo of 2 channels and writes 4x4 of 4 channels;
  // the 72 kept weights stream in once.
  CHECK(cost.dram_bytes == 4 * (25 * 2 * 4 + 16 * 4 * 4) + 72 * 4);
  double want_energy = device.e_mac_j * 4608.0 +
                       device.e_dram_byte_j * static_cast<double>(cost.dram_bytes);
  CHECK(cost.energy_j == doctest::Approx(want_energy).epsilon(1e-12));
}

TEST_CASE("channel pruning scales cycles and macs linearly") {
  LayerSpec layer = small_conv();
  DeviceSpec device = unit_device();
  TileSpec tile{4, 4, 0};
  LayerCost dense = layer_cost(layer, tile, device);

  LayerSparsity half = channel_sparsity(layer, {1, 0});
  LayerCost cost = layer_cost(layer, tile, device, nullptr, &half);
  CHECK(cost.cycles == dense.cycles / 2);
  CHECK(cost.macs == dense.macs / 2);
  // Input reads shrink with the kept channels; weight stream shrinks too.
  CHECK(cost.dram_bytes == 4 * (25 * 1 * 4 + 16 * 4 * 4) + 36 * 4);

  LayerSparsity none = channel_sparsity(layer, {0, 0});
  LayerCost empty = layer_cost(layer, tile, device, nullptr, &none);
  CHECK(empty.cycles == 0);
  CHECK(empty.macs == 0);
}

TEST_CASE("weight masks reduce to per-channel row occupancy") {
  LayerSpec layer;
  layer.name = "m";
  layer.c_in = 2;
  layer.c_out = 2;
  layer.k = 3;
  layer.stride = 1;
  layer.padding = 1;
  layer.h = 6;
  layer.w = 6;
  layer.finalize();

  MaskEntry entry;
  entry.name = "m";
  entry.shape = {2, 2, 3, 3};
  entry.bits.assign(36, 0);
  auto set_bit = [&](int co, int ci, int r, int c) {
    entry.bits[static_cast<size_t>(((co * 2 + ci) * 3 + r) * 3 + c)] = 1;
  };
  set_bit(0, 0, 0, 1);
  set_bit(1, 0, 0, 0);
  set_bit(1, 0, 2, 2);

  LayerSparsity s = sparsity_from_mask_entry(layer, entry);
  CHECK(s.channel_kept == std::vector<uint8_t>{1, 0});
  CHECK(s.rows_nonzero == std::vector<int>{2, 0});  // rows 0 and 2 in use
  CHECK(s.nnz_per_channel == std::vector<int64_t>{3, 0});

  MaskEntry wrong = entry;
  wrong.shape = {2, 2, 3};
  wrong.bits.assign(12, 1);
  CHECK_THROWS_AS(sparsity_from_mask_entry(layer, wrong), ContractError);
}

TEST_CASE("row sparsity cuts cycles by the occupancy fraction") {
  LayerSpec layer = small_conv();
  LayerSparsity s = dense_sparsity(layer);
  s.rows_nonzero = {1, 1};  // one of three kernel rows in use
  s.nnz_per_channel = {12, 12};
  Tile t;
  t.r0 = 0;
  t.r1 = 3;
  t.c0 = 0;
  t.c1 = 4;
  // ceil(3 * 1 / 3) = 1 per channel, 4 groups.
  CHECK(tile_cycles(layer, t, s, 1) == 8);
}

TEST_CASE("feature masks skip fully dropped tiles") {
  LayerSpec layer = small_conv();
  DeviceSpec device = unit_device();
  TileSpec tile{4, 4, 0};

  spatial::FeatureMask mask;
  mask.layer = "conv";
  mask.height = 8;
  mask.width = 8;
  mask.keep.assign(64, 1);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      mask.keep[static_cast<size_t>(r) * 8 + c] = 0;
    }
  }

  LayerCost cost = layer_cost(layer, tile, device, &mask);
  CHECK(cost.tiles_total == 4);
  CHECK(cost.tiles_skipped == 1);
  CHECK(cost.cycles == 96);
  CHECK(cost.macs == 3 * 16 * 72);
  CHECK(cost.dram_bytes == 3 * (25 * 2 * 4 + 16 * 4 * 4) + 72 * 4);

  // One kept cell inside the tile keeps the whole tile alive.
  mask.keep[0] = 1;
  LayerCost alive = layer_cost(layer, tile, device, &mask);
  CHECK(alive.tiles_skipped == 0);
  CHECK(alive.cycles == 128);

  spatial::FeatureMask wrong = mask;
  wrong.height = 4;
  wrong.keep.assign(32, 1);
  CHECK_THROWS_AS(layer_cost(layer, tile, device, &wrong), ContractError);
}

TEST_CASE("dropping every tile drops the weight stream too") {
  LayerSpec layer = small_conv();
  DeviceSpec device = unit_device();
  spatial::FeatureMask mask;
  mask.layer = "conv";
  mask.height = 8;
  mask.width = 8;
  mask.keep.assign(64, 0);
  LayerCost cost = layer_cost(layer, TileSpec{4, 4, 0}, device, &mask);
  CHECK(cost.tiles_skipped == 4);
  CHECK(cost.cycles == 0);
  CHECK(cost.dram_bytes == 0);
  CHECK(cost.energy_j == 0.0);
}

TEST_CASE("fixed layers pass their table costs through") {
  LayerSpec fixed;
  fixed.name = "pool1";
  fixed.kind = LayerKind::kFixed;
  fixed.fixed_gops = 0.002;
  fixed.fixed_cycles = 12345;
  fixed.fixed_dram_bytes = 4096;
  DeviceSpec device = unit_device();
  LayerCost cost = layer_cost(fixed, TileSpec{}, device);
  CHECK(cost.cycles == 12345);
  CHECK(cost.latency_s == doctest::Approx(12345.0 / 1e6));
  CHECK(cost.macs == 1000000);  // gops * 1e9 / 2
  CHECK(cost.dram_bytes == 4096);
  CHECK(cost.energy_j ==
        doctest::Approx(device.e_mac_j * 1e6 + device.e_dram_byte_j * 4096));
}

TEST_CASE("model cost sums layers and reports effective gops") {
  LayerSpec a = small_conv();
  a.name = "a";
  LayerSpec b = small_conv();
  b.name = "b";
  DeviceSpec device = unit_device();
  TileSpec tile{4, 4, 0};

  std::map<std::string, LayerSparsity> sparsity;
  sparsity.emplace("b", channel_sparsity(b, {1, 0}));
  ModelCost cost = model_cost({a, b}, tile, device, {}, sparsity);

  REQUIRE(cost.layers.size() == 2);
  CHECK(cost.total.cycles == cost.layers[0].cycles + cost.layers[1].cycles);
  CHECK(cost.total.macs == 4608 + 2304);
  CHECK(cost.gops_dense == doctest::Approx(2 * 9216.0 / 1e9));
  CHECK(cost.gops_effective ==
        doctest::Approx(2.0 * (4608 + 2304) / 1e9).epsilon(1e-12));
  CHECK(cost.total.latency_s ==
        doctest::Approx(cost.layers[0].latency_s + cost.layers[1].latency_s));
}

TEST_CASE("roofline bound divides workload by peak throughput") {
  DeviceSpec device;
  device.peak_gops = 2256.0;
  CHECK(roofline_bound(157.9, device) ==
        doctest::Approx(157.9 / 2256.0).epsilon(1e-12));
  CHECK(roofline_bound(157.9, device) * 1000.0 ==
        doctest::Approx(70.0).epsilon(0.002));
  CHECK(roofline_bound(0.0, device) == 0.0);
  CHECK_THROWS_AS(roofline_bound(-1.0, device), ContractError);
}

TEST_CASE("layer tables round trip through json and disk") {
  LayerSpec conv = small_conv();
  LayerSpec fixed;
  fixed.name = "pool";
  fixed.kind = LayerKind::kFixed;
  fixed.fixed_gops = 0.01;
  fixed.fixed_cycles = 99;
  fixed.fixed_dram_bytes = 17;

  Json j = layer_table_to_json({conv, fixed});
  std::vector<LayerSpec> back = layer_table_from_json(j);
  REQUIRE(back.size() == 2);
  CHECK(back[0].name == "conv");
  CHECK(back[0].h_out == 8);
  CHECK(back[1].kind == LayerKind::kFixed);
  CHECK(back[1].fixed_cycles == 99);

  auto dir = testutil::scratch_dir("layer_table");
  testutil::write_file(dir / "net.json", j.dump(2));
  std::vector<LayerSpec> loaded = load_layer_table(dir / "net.json");
  CHECK(loaded.size() == 2);

  CHECK_THROWS_AS(load_layer_table(dir / "missing.json"), IoError);
  Json empty;
  empty["layers"] = Json::array();
  CHECK_THROWS_AS(layer_table_from_json(empty), FormatError);
  Json junk;
  junk["layers"] = {{{"name", "x"}, {"kind", "banana"}}};
  CHECK_THROWS_AS(layer_table_from_json(junk), FormatError);
}

TEST_CASE("device json round trips and rejects bad values") {
  DeviceSpec d;
  d.name = "u50";
  d.clock_hz = 3e8;
  d.dsp_count = 5952;
  d.peak_gops = 1488.0;
  d.board_power_w = 20.0;
  d.filters_in_parallel = 64;
  DeviceSpec back = device_from_json(device_to_json(d));
  CHECK(back.name == d.name);
  CHECK(back.clock_hz == d.clock_hz);
  CHECK(back.dsp_count == d.dsp_count);
  CHECK(back.peak_gops == d.peak_gops);
  CHECK(back.filters_in_parallel == 64);

  Json bad;
  bad["clock_hz"] = -1.0;
  CHECK_THROWS_AS(device_from_json(bad), ContractError);
}

TEST_CASE("bundled network tables scale with resolution") {
  auto hd = load_layer_table(std::filesystem::path(TRIVID_SOURCE_DIR) /
                             "data" / "resnet50_hd.json");
  auto sd = load_layer_table(std::filesystem::path(TRIVID_SOURCE_DIR) /
                             "data" / "resnet50_224.json");
  REQUIRE(hd.size() == sd.size());
  double hd_gops = 0.0, sd_gops = 0.0;
  for (const auto& l : hd) hd_gops += layer_gops(l);
  for (const auto& l : sd) sd_gops += layer_gops(l);
  CHECK(hd_gops > 10.0 * sd_gops);

  // At HD input the two largest 3x3 convolutions alone outweigh the whole
  // low-resolution network.
  std::vector<double> big;
  for (const auto& l : hd) {
    if (l.kind == LayerKind::kConv && l.k == 3) big.push_back(layer_gops(l));
  }
  std::sort(big.rbegin(), big.rend());
  REQUIRE(big.size() >= 2);
  CHECK(big[0] + big[1] > sd_gops);
}
