/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include "trivid/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "trivid/error.hpp"
#include "trivid/rng.hpp"

namespace trivid {

namespace {

constexpr uint64_t kObjectStreamBase = 0x0B17;
constexpr uint64_t kDetectionStream = 0xDE7EC7;
constexpr std::array<uint8_t, 3> kBackground = {32, 32, 32};

// Reflects pos into [lo, hi], flipping vel on each bounce.
void bounce(double& pos, double& vel, double lo, double hi) {
  if (hi <= lo) {
    pos = lo;
    vel = 0.0;
    return;
  }
  while (pos < lo || pos > hi) {
    if (pos < lo) {
      pos = 2.0 * lo - pos;
      vel = -vel;
    } else {
      pos = 2.0 * hi - pos;
      vel = -vel;
    }
  }
}

double clamp(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

std::array<uint8_t, 3> hsv_to_rgb(double h, double s, double v) {
  h = std::fmod(h, 360.0);
  double c = v * s;
  double hp = h / 60.0;
  double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) {
    r = c; g = x;
  } else if (hp < 2) {
    r = x; g = c;
  } else if (hp < 3) {
    g = c; b = x;
  } else if (hp < 4) {
    g = x; b = c;
  } else if (hp < 5) {
    r = x; b = c;
  } else {
    r = c; b = x;
  }
  double m = v - c;
  auto to8 = [m](double ch) {
    return static_cast<uint8_t>(std::lround((ch + m) * 255.0));
  };
  return {to8(r), to8(g), to8(b)};
}

Json box_to_json(const Box& b) { return Json::array({b.x1, b.y1, b.x2, b.y2}); }

Box box_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 4) {
    throw FormatError("box must be a 4-element array");
  }
  return Box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
             j[3].get<double>()};
}

}  // namespace

void ScenarioSpec::validate() const {
  require(width > 0 && height > 0, "scenario frame dimensions must be positive");
  require(n_frames >= 1, "scenario must have at least one frame");
  require(n_objects >= 1, "scenario must have at least one object");
  require(min_size > 0 && max_size >= min_size, "invalid object size range");
  require(min_speed >= 0 && max_speed >= min_speed, "invalid speed range");
  require(jitter_sigma >= 0, "jitter sigma must be non-negative");
  require(miss_prob >= 0 && miss_prob < 1, "miss probability must be in [0,1)");
  require(fps > 0, "fps must be positive");
}

int ScenarioTruth::total_gt_boxes() const {
  int n = 0;
  for (const ObjectTrack& t : objects) {
    for (const auto& b : t.boxes) {
      if (b.has_value()) ++n;
    }
  }
  return n;
}

void ScenarioTruth::validate() const {
  require(n_frames >= 1, "scenario truth must cover at least one frame");
  require(static_cast<int>(detections.size()) == n_frames,
          "detections must cover every frame");
  for (const ObjectTrack& t : objects) {
    require(static_cast<int>(t.boxes.size()) == n_frames,
            "object track must cover every frame");
    for (const auto& b : t.boxes) {
      if (b.has_value()) {
        require(b->well_formed(), "ground-truth box is malformed");
        require(b->x1 >= 0 && b->y1 >= 0 && b->x2 <= spec.width &&
                    b->y2 <= spec.height,
                "ground-truth box lies outside the frame");
      }
    }
  }
  for (const auto& frame_dets : detections) {
    for (const Box& b : frame_dets) {
      require(b.well_formed(), "detection box is malformed");
      require(b.x1 >= 0 && b.y1 >= 0 && b.x2 <= spec.width &&
                  b.y2 <= spec.height,
              "detection box lies outside the frame");
    }
  }
}

ScenarioTruth synth_scenario(const ScenarioSpec& spec, uint64_t seed) {
  spec.validate();
  ScenarioTruth truth;
  truth.seed = seed;
  truth.spec = spec;
  truth.n_frames = spec.n_frames;
  truth.detections.resize(spec.n_frames);

  Rng master(seed);
  double prev_pair_y = 0.0;
  for (int i = 0; i < spec.n_objects; ++i) {
    Rng rng = master.split(kObjectStreamBase + static_cast<uint64_t>(i));
    double side = rng.uniform(spec.min_size, spec.max_size);
    side = std::min(side, std::min(spec.width, spec.height) - 2.0);
    double speed = rng.uniform(spec.min_speed, spec.max_speed);
    double x, y, vx, vy;
    if (spec.motion == MotionModel::kCrossing) {
      bool ltr = (i % 2 == 0);
      x = ltr ? 1.0 : spec.width - side - 1.0;
      y = rng.uniform(0.0, spec.height - side);
      // Odd objects start near their even partner's lane so paths cross.
      if (!ltr) {
        y = clamp(prev_pair_y + rng.uniform(-side / 2.0, side / 2.0), 0.0,
                  spec.height - side);
      } else {
        prev_pair_y = y;
      }
      vx = ltr ? speed : -speed;
      vy = rng.uniform(-0.5, 0.5);
    } else {
      x = rng.uniform(0.0, spec.width - side);
      y = rng.uniform(0.0, spec.height - side);
      double angle = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
      vx = speed * std::cos(angle);
      vy = speed * std::sin(angle);
    }

    ObjectTrack track;
    track.id = i;
    track.boxes.reserve(spec.n_frames);
    for (int f = 0; f < spec.n_frames; ++f) {
      track.boxes.push_back(Box{x, y, x + side, y + side});
      x += vx;
      y += vy;
      bounce(x, vx, 0.0, spec.width - side);
      bounce(y, vy, 0.0, spec.height - side);
    }
    truth.objects.push_back(std::move(track));
  }

  Rng det_rng = master.split(kDetectionStream);
  for (int f = 0; f < spec.n_frames; ++f) {
    for (const ObjectTrack& track : truth.objects) {
      const Box& gt = *track.boxes[f];
      bool miss = spec.miss_prob > 0.0 && det_rng.bernoulli(spec.miss_prob);
      double jx = 0.0, jy = 0.0;
      if (!miss && spec.jitter_sigma > 0.0) {
        jx = det_rng.normal(0.0, spec.jitter_sigma);
        jy = det_rng.normal(0.0, spec.jitter_sigma);
      }
      if (miss) continue;
      double w = gt.width();
      double h = gt.height();
      double x1 = clamp(gt.x1 + jx, 0.0, spec.width - w);
      double y1 = clamp(gt.y1 + jy, 0.0, spec.height - h);
      truth.detections[f].push_back(Box{x1, y1, x1 + w, y1 + h});
    }
  }
  truth.validate();
  return truth;
}

ScenarioTruth restrict_to_frames(const ScenarioTruth& truth,
                                 const std::vector<int>& frames) {
  require(!frames.empty(), "frame subset must be non-empty");
  for (size_t i = 0; i < frames.size(); ++i) {
    require(frames[i] >= 0 && frames[i] < truth.n_frames,
            "frame index out of range");
    if (i > 0) {
      require(frames[i] > frames[i - 1],
              "frame subset must be strictly increasing");
    }
  }
  ScenarioTruth out;
  out.seed = truth.seed;
  out.spec = truth.spec;
  out.spec.n_frames = static_cast<int>(frames.size());
  out.n_frames = static_cast<int>(frames.size());
  out.objects.reserve(truth.objects.size());
  for (const ObjectTrack& t : truth.objects) {
    ObjectTrack r;
    r.id = t.id;
    r.boxes.reserve(frames.size());
    for (int f : frames) r.boxes.push_back(t.boxes[f]);
    out.objects.push_back(std::move(r));
  }
  out.detections.reserve(frames.size());
  for (int f : frames) out.detections.push_back(truth.detections[f]);
  return out;
}

std::array<uint8_t, 3> object_color(int id) {
  double hue = std::fmod(0.61803398875 * (id + 1), 1.0) * 360.0;
  return hsv_to_rgb(hue, 0.85, 0.95);
}

VideoSequence render_scenario(const ScenarioTruth& truth) {
  truth.validate();
  VideoSequence video;
  video.fps = truth.spec.fps;
  video.frames.reserve(truth.n_frames);
  for (int f = 0; f < truth.n_frames; ++f) {
    Frame frame =
        Frame::filled(truth.spec.width, truth.spec.height, kBackground, f);
    for (const ObjectTrack& track : truth.objects) {
      if (!track.boxes[f].has_value()) continue;
      const Box& b = *track.boxes[f];
      auto rgb = object_color(track.id);
      int x0 = std::max(0, static_cast<int>(std::lround(b.x1)));
      int x1 = std::min(frame.width, static_cast<int>(std::lround(b.x2)));
      int y0 = std::max(0, static_cast<int>(std::lround(b.y1)));
      int y1 = std::min(frame.height, static_cast<int>(std::lround(b.y2)));
      for (int p = 0; p < Frame::kChannels; ++p) {
        for (int y = y0; y < y1; ++y) {
          for (int x = x0; x < x1; ++x) frame.at(p, x, y) = rgb[p];
        }
      }
    }
    video.frames.push_back(std::move(frame));
  }
  return video;
}

Json scenario_spec_to_json(const ScenarioSpec& spec) {
  Json j;
  j["width"] = spec.width;
  j["height"] = spec.height;
  j["frames"] = spec.n_frames;
  j["objects"] = spec.n_objects;
  j["motion"] = spec.motion == MotionModel::kCrossing ? "crossing" : "wander";
  j["min_size"] = spec.min_size;
  j["max_size"] = spec.max_size;
  j["min_speed"] = spec.min_speed;
  j["max_speed"] = spec.max_speed;
  j["jitter_sigma"] = spec.jitter_sigma;
  j["miss_prob"] = spec.miss_prob;
  j["fps"] = spec.fps;
  return j;
}

ScenarioSpec scenario_spec_from_json(const Json& j) {
  ScenarioSpec spec;
  spec.width = j.at("width").get<int>();
  spec.height = j.at("height").get<int>();
  spec.n_frames = j.at("frames").get<int>();
  spec.n_objects = j.at("objects").get<int>();
  if (j.contains("motion")) {
    std::string m = j.at("motion").get<std::string>();
    if (m == "crossing") {
      spec.motion = MotionModel::kCrossing;
    } else if (m == "wander") {
      spec.motion = MotionModel::kWander;
    } else {
      throw FormatError("unknown motion model: " + m);
    }
  }
  if (j.contains("min_size")) spec.min_size = j.at("min_size").get<double>();
  if (j.contains("max_size")) spec.max_size = j.at("max_size").get<double>();
  if (j.contains("min_speed")) spec.min_speed = j.at("min_speed").get<double>();
  if (j.contains("max_speed")) spec.max_speed = j.at("max_speed").get<double>();
  if (j.contains("jitter_sigma")) {
    spec.jitter_sigma = j.at("jitter_sigma").get<double>();
  }
  if (j.contains("miss_prob")) spec.miss_prob = j.at("miss_prob").get<double>();
  if (j.contains("fps")) spec.fps = j.at("fps").get<double>();
  spec.validate();
  return spec;
}

Json scenario_to_json(const ScenarioTruth& truth) {
  Json j;
  j["seed"] = truth.seed;
  j["spec"] = scenario_spec_to_json(truth.spec);
  j["frames"] = truth.n_frames;
  Json objects = Json::array();
  for (const ObjectTrack& t : truth.objects) {
    Json obj;
    obj["id"] = t.id;
    Json boxes = Json::array();
    for (const auto& b : t.boxes) {
      boxes.push_back(b.has_value() ? box_to_json(*b) : Json(nullptr));
    }
    obj["boxes"] = std::move(boxes);
    objects.push_back(std::move(obj));
  }
  j["objects"] = std::move(objects);
  Json dets = Json::array();
  for (const auto& frame_dets : truth.detections) {
    Json fd = Json::array();
    for (const Box& b : frame_dets) fd.push_back(box_to_json(b));
    dets.push_back(std::move(fd));
  }
  j["detections"] = std::move(dets);
  return j;
}

ScenarioTruth scenario_from_json(const Json& j) {
  try {
    ScenarioTruth truth;
    truth.seed = j.at("seed").get<uint64_t>();
    truth.spec = scenario_spec_from_json(j.at("spec"));
    truth.n_frames = j.at("frames").get<int>();
    for (const Json& obj : j.at("objects")) {
      ObjectTrack t;
      t.id = obj.at("id").get<int>();
      for (const Json& b : obj.at("boxes")) {
        if (b.is_null()) {
          t.boxes.push_back(std::nullopt);
        } else {
          t.boxes.push_back(box_from_json(b));
        }
      }
      truth.objects.push_back(std::move(t));
    }
    for (const Json& fd : j.at("detections")) {
      std::vector<Box> frame_dets;
      for (const Json& b : fd) frame_dets.push_back(box_from_json(b));
      truth.detections.push_back(std::move(frame_dets));
    }
    truth.validate();
    return truth;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed scenario file: ") + e.what());
  }
}

}  // namespace trivid
