/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "trivid/frame.hpp"
#include "trivid/geometry.hpp"

namespace trivid {

using Json = nlohmann::ordered_json;

enum class MotionModel { kWander, kCrossing };

// Synthetic scene description. "wander" starts objects at random positions
// with random headings; "crossing" launches them from opposite sides on
// near-collision paths so that tracks overlap mid-sequence.
struct ScenarioSpec {
  int width = 320;
  int height = 240;
  int n_frames = 48;
  int n_objects = 3;
  MotionModel motion = MotionModel::kWander;
  double min_size = 24.0;
  double max_size = 40.0;
  double min_speed = 2.0;
  double max_speed = 6.0;
  double jitter_sigma = 0.0;  // detection center noise, pixels
  double miss_prob = 0.0;     // probability a detection is dropped
  double fps = 30.0;

  void validate() const;
};

struct ObjectTrack {
  int id = 0;
  std::vector<std::optional<Box>> boxes;  // one slot per frame
};

// Ground truth plus the derived noisy detections for one scenario.
struct ScenarioTruth {
  uint64_t seed = 0;
  int n_frames = 0;
  ScenarioSpec spec;
  std::vector<ObjectTrack> objects;
  std::vector<std::vector<Box>> detections;  // per frame, object id order

  int total_gt_boxes() const;
  void validate() const;
};

// Constant-velocity boxes that bounce off the frame borders; detections are
// the ground-truth boxes with optional center jitter and misses.
ScenarioTruth synth_scenario(const ScenarioSpec& spec, uint64_t seed);

// Keeps only the given strictly increasing frame indices, reindexed
// consecutively.
ScenarioTruth restrict_to_frames(const ScenarioTruth& truth,
                                 const std::vector<int>& frames);

// Uniform background with one filled rectangle per visible object; colors
// are a fixed function of the object id.
VideoSequence render_scenario(const ScenarioTruth& truth);

std::array<uint8_t, 3> object_color(int id);

Json scenario_spec_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_spec_from_json(const Json& j);
Json scenario_to_json(const ScenarioTruth& truth);
ScenarioTruth scenario_from_json(const Json& j);

}  // namespace trivid
