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
#include "trivid/archive.hpp"
#include "trivid/error.hpp"
#include "trivid/frame.hpp"
#include "trivid/rng.hpp"
#include "trivid/scenario.hpp"

using namespace trivid;

TEST_CASE("rng draws are a pure function of seed and stream") {
  Rng a(42, 7);
  Rng b(42, 7);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  Rng c(42, 8);
  Rng d(43, 7);
  Rng base(42, 7);
  CHECK(c.next_u64() != base.next_u64());
  CHECK(d.next_u64() != Rng(42, 7).next_u64());
}

TEST_CASE("rng split children are independent of parent position") {
  Rng parent(5);
  Rng child_before = parent.split(3);
  parent.next_u64();
  parent.next_u64();
  Rng child_after = parent.split(3);
  for (int i = 0; i < 20; ++i) {
    CHECK(child_before.next_u64() == child_after.next_u64());
  }
  // Distinct substreams diverge.
  CHECK(parent.split(1).next_u64() != parent.split(2).next_u64());
}

TEST_CASE("rng uniform and below stay in range") {
  Rng rng(123);
  for (int i = 0; i < 10000; ++i) {
    double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  std::set<uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    uint64_t v = rng.below(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);  // all residues show up
}

TEST_CASE("rng normal has sane first moments") {
  Rng rng(9);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("frame fill and gray conversion") {
  Frame f = Frame::filled(4, 2, {255, 0, 0});
  CHECK(f.plane_size() == 8);
  CHECK(f.at(0, 3, 1) == 255);
  CHECK(f.at(1, 3, 1) == 0);
  GrayPlane g = rgb_to_gray(f);
  CHECK(g.width == 4);
  CHECK(g.height == 2);
  CHECK(g.at(0, 0) == doctest::Approx(0.299 * 255).epsilon(1e-6));

  Frame white = Frame::filled(2, 2, {255, 255, 255});
  GrayPlane gw = rgb_to_gray(white);
  CHECK(gw.at(1, 1) == doctest::Approx(255.0).epsilon(1e-6));
}

TEST_CASE("weight archive round trips bitwise") {
  auto dir = testutil::scratch_dir("archive_rt");
  WeightArchive archive;
  WeightTensor t;
  t.name = "conv0";
  t.shape = {2, 3, 3, 3};
  Rng rng(4);
  for (size_t i = 0; i < 2 * 3 * 3 * 3; ++i) {
    t.values.push_back(static_cast<float>(rng.normal()));
  }
  archive.tensors.push_back(t);
  WeightTensor bias;
  bias.name = "bias";
  bias.shape = {5};
  bias.values = {1.f, -2.f, 0.25f, 1e-8f, 3e7f};
  archive.tensors.push_back(bias);

  save_weight_archive(archive, dir / "a.triw");
  WeightArchive loaded = load_weight_archive(dir / "a.triw");
  REQUIRE(loaded.tensors.size() == 2);
  CHECK(loaded.tensors[0].name == "conv0");
  CHECK(loaded.tensors[0].shape == t.shape);
  CHECK(loaded.tensors[0].values == t.values);
  CHECK(loaded.tensors[1].values == bias.values);

  // Re-saving the loaded archive reproduces the file byte for byte.
  save_weight_archive(loaded, dir / "b.triw");
  CHECK(testutil::read_file(dir / "a.triw") ==
        testutil::read_file(dir / "b.triw"));
}

TEST_CASE("mask file round trips bitwise") {
  auto dir = testutil::scratch_dir("mask_rt");
  PruneMask mask;
  MaskEntry e;
  e.name = "conv0";
  e.shape = {1, 2, 3, 3};
  Rng rng(11);
  for (size_t i = 0; i < 18; ++i) {
    e.bits.push_back(rng.bernoulli(0.5) ? 1 : 0);
  }
  mask.entries.push_back(e);
  save_mask(mask, dir / "m.trim");
  PruneMask loaded = load_mask(dir / "m.trim");
  REQUIRE(loaded.entries.size() == 1);
  CHECK(loaded.entries[0].bits == e.bits);
  save_mask(loaded, dir / "m2.trim");
  CHECK(testutil::read_file(dir / "m.trim") ==
        testutil::read_file(dir / "m2.trim"));
}

TEST_CASE("archive loader rejects damaged files") {
  auto dir = testutil::scratch_dir("archive_bad");
  WeightArchive archive;
  WeightTensor t;
  t.name = "w";
  t.shape = {2, 2};
  t.values = {1.f, 2.f, 3.f, 4.f};
  archive.tensors.push_back(t);
  save_weight_archive(archive, dir / "ok.triw");
  std::string bytes = testutil::read_file(dir / "ok.triw");

  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_weight_archive(dir / "absent.triw"), IoError);
  }
  SUBCASE("bad magic") {
    std::string bad = bytes;
    bad[0] = 'X';
    testutil::write_file(dir / "bad.triw", bad);
    CHECK_THROWS_AS(load_weight_archive(dir / "bad.triw"), FormatError);
  }
  SUBCASE("bad version") {
    std::string bad = bytes;
    bad[4] = 9;
    testutil::write_file(dir / "bad.triw", bad);
    CHECK_THROWS_AS(load_weight_archive(dir / "bad.triw"), FormatError);
  }
  SUBCASE("truncated payload") {
    testutil::write_file(dir / "bad.triw", bytes.substr(0, bytes.size() - 2));
    CHECK_THROWS_AS(load_weight_archive(dir / "bad.triw"), IoError);
  }
  SUBCASE("trailing bytes") {
    testutil::write_file(dir / "bad.triw", bytes + "zz");
    CHECK_THROWS_AS(load_weight_archive(dir / "bad.triw"), FormatError);
  }
}

TEST_CASE("mask loader rejects nonzero padding bits") {
  auto dir = testutil::scratch_dir("mask_pad");
  PruneMask mask;
  MaskEntry e;
  e.name = "w";
  e.shape = {3};  // 3 bits -> 1 byte with 5 padding bits
  e.bits = {1, 0, 1};
  mask.entries.push_back(e);
  save_mask(mask, dir / "m.trim");
  std::string bytes = testutil::read_file(dir / "m.trim");
  // Flip a padding bit in the last byte of the payload.
  bytes[bytes.size() - 1] = static_cast<char>(
      static_cast<unsigned char>(bytes[bytes.size() - 1]) | 0x80);
  testutil::write_file(dir / "bad.trim", bytes);
  CHECK_THROWS_AS(load_mask(dir / "bad.trim"), FormatError);
}

TEST_CASE("scenario synthesis is deterministic and well formed") {
  ScenarioSpec spec;
  spec.n_frames = 20;
  spec.n_objects = 3;
  spec.jitter_sigma = 1.0;
  spec.miss_prob = 0.1;
  ScenarioTruth a = synth_scenario(spec, 77);
  ScenarioTruth b = synth_scenario(spec, 77);
  CHECK(scenario_to_json(a) == scenario_to_json(b));
  CHECK(a.objects.size() == 3);
  CHECK(a.detections.size() == 20);
  for (const auto& track : a.objects) {
    REQUIRE(track.boxes.size() == 20);
    for (const auto& box : track.boxes) {
      if (!box.has_value()) continue;
      CHECK(box->well_formed());
      CHECK(box->x1 >= 0.0);
      CHECK(box->y1 >= 0.0);
      CHECK(box->x2 <= spec.width);
      CHECK(box->y2 <= spec.height);
    }
  }
  CHECK(scenario_to_json(synth_scenario(spec, 78)) != scenario_to_json(a));
}

TEST_CASE("scenario json round trips") {
  ScenarioSpec spec;
  spec.n_frames = 8;
  spec.n_objects = 2;
  spec.motion = MotionModel::kCrossing;
  spec.miss_prob = 0.2;
  ScenarioTruth truth = synth_scenario(spec, 5);
  Json j = scenario_to_json(truth);
  ScenarioTruth back = scenario_from_json(j);
  CHECK(scenario_to_json(back) == j);
  CHECK(back.total_gt_boxes() == truth.total_gt_boxes());
}

TEST_CASE("restrict_to_frames keeps order and reindexes") {
  ScenarioSpec spec;
  spec.n_frames = 10;
  spec.n_objects = 2;
  ScenarioTruth truth = synth_scenario(spec, 3);
  std::vector<int> frames = {1, 4, 7};
  ScenarioTruth cut = restrict_to_frames(truth, frames);
  CHECK(cut.n_frames == 3);
  REQUIRE(cut.detections.size() == 3);
  for (size_t i = 0; i < frames.size(); ++i) {
    const auto& got_dets = cut.detections[i];
    const auto& want_dets = truth.detections[static_cast<size_t>(frames[i])];
    REQUIRE(got_dets.size() == want_dets.size());
    for (size_t d = 0; d < got_dets.size(); ++d) {
      CHECK(got_dets[d].x1 == want_dets[d].x1);
      CHECK(got_dets[d].y1 == want_dets[d].y1);
      CHECK(got_dets[d].x2 == want_dets[d].x2);
      CHECK(got_dets[d].y2 == want_dets[d].y2);
    }
    for (size_t g = 0; g < truth.objects.size(); ++g) {
      const auto& want =
          truth.objects[g].boxes[static_cast<size_t>(frames[i])];
      const auto& got = cut.objects[g].boxes[i];
      CHECK(want.has_value() == got.has_value());
      if (want.has_value()) {
        CHECK(got->x1 == want->x1);
        CHECK(got->y2 == want->y2);
      }
    }
  }
}

TEST_CASE("rendered frames paint objects over the background") {
  ScenarioSpec spec;
  spec.width = 64;
  spec.height = 48;
  spec.n_frames = 2;
  spec.n_objects = 1;
  ScenarioTruth truth = synth_scenario(spec, 2);
  VideoSequence video = render_scenario(truth);
  REQUIRE(video.frames.size() == 2);
  const Frame& f = video.frames[0];
  const auto& box = truth.objects[0].boxes[0];
  REQUIRE(box.has_value());
  int cx = static_cast<int>((box->x1 + box->x2) / 2);
  int cy = static_cast<int>((box->y1 + box->y2) / 2);
  auto rgb = object_color(truth.objects[0].id);
  CHECK(f.at(0, cx, cy) == rgb[0]);
  CHECK(f.at(1, cx, cy) == rgb[1]);
  CHECK(f.at(2, cx, cy) == rgb[2]);
  CHECK(f.at(0, 0, 0) == 32);  // background corner
}

TEST_CASE("scenario spec validation") {
  ScenarioSpec spec;
  spec.min_size = 50.0;
  spec.max_size = 40.0;
  CHECK_THROWS_AS(spec.validate(), ContractError);
  ScenarioSpec bad_frames;
  bad_frames.n_frames = 0;
  CHECK_THROWS_AS(bad_frames.validate(), ContractError);
}
