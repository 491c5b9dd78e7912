/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#pragma once

#include <vector>

#include "trivid/geometry.hpp"
#include "trivid/scenario.hpp"

namespace trivid::metrics {

// Intersection over union; 0 when the union has zero area.
double iou(const Box& a, const Box& b);

struct TrackerConfig {
  double iou_threshold = 0.3;
};

struct TrackRecord {
  int detection_index = 0;
  int track_id = 0;
  Box box;
};

struct TrackAssignment {
  std::vector<std::vector<TrackRecord>> frames;
  int next_id = 0;
};

// Frame-to-frame association: detections are matched against the previous
// frame's tracks greedily by descending IoU (threshold gated); unmatched
// detections open fresh ids, unmatched tracks die. Ties break on
// (lower detection index, lower track id).
TrackAssignment greedy_iou_tracker(
    const std::vector<std::vector<Box>>& detections_per_frame,
    double iou_threshold = 0.3);

// One frame's GT-to-prediction matching, greedy by descending IoU with ties
// broken on (lower GT object index, lower prediction record index). Shared
// by the IDSw / MOTA paths so both count against the same correspondences.
struct FrameMatch {
  int gt_object = 0;     // index into truth.objects
  int pred_record = 0;   // index into assignment.frames[f]
};
std::vector<FrameMatch> match_frame(const ScenarioTruth& truth, int frame,
                                    const TrackAssignment& assignment,
                                    double iou_threshold);

// Identity switches: a GT object whose current matched id differs from its
// most recent previously matched id. Frames where the object is unmatched
// do not count by themselves.
int count_idsw(const ScenarioTruth& truth, const TrackAssignment& assignment,
               double iou_threshold);

struct MotScores {
  int idsw = 0;
  int fp = 0;
  int fn = 0;
  int gt_total = 0;
  double mota = 0.0;
  double idf1 = 0.0;
};

double mota(const ScenarioTruth& truth, const TrackAssignment& assignment,
            double iou_threshold);

// Identity F1 over an exact (optimal) one-to-one pairing of GT trajectories
// with predicted trajectories; per-frame overlap counts use the same IoU
// threshold gate.
double idf1(const ScenarioTruth& truth, const TrackAssignment& assignment,
            double iou_threshold);

MotScores evaluate(const ScenarioTruth& truth,
                   const TrackAssignment& assignment, double iou_threshold);

}  // namespace trivid::metrics
