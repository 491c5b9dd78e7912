/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include "trivid/metrics.hpp"

#include <algorithm>
#include <climits>
#include <map>

#include "trivid/error.hpp"

namespace trivid::metrics {

namespace {

struct ClearCounts {
  int idsw = 0;
  int fp = 0;
  int fn = 0;
  int gt_total = 0;
};

void check_inputs(const ScenarioTruth& truth, const TrackAssignment& assignment,
                  double iou_threshold) {
  require(iou_threshold > 0.0 && iou_threshold < 1.0,
          "iou threshold must lie in (0,1)");
  require(static_cast<int>(assignment.frames.size()) == truth.n_frames,
          "assignment must cover the same frame range as the truth");
}

ClearCounts clear_counts(const ScenarioTruth& truth,
                         const TrackAssignment& assignment,
                         double iou_threshold) {
  ClearCounts counts;
  std::vector<int> last_id(truth.objects.size(), -1);
  for (int f = 0; f < truth.n_frames; ++f) {
    int present = 0;
    for (const ObjectTrack& t : truth.objects) {
      if (t.boxes[f].has_value()) ++present;
    }
    counts.gt_total += present;
    auto matches = match_frame(truth, f, assignment, iou_threshold);
    counts.fn += present - static_cast<int>(matches.size());
    counts.fp += static_cast<int>(assignment.frames[f].size()) -
                 static_cast<int>(matches.size());
    for (const FrameMatch& m : matches) {
      int id = assignment.frames[f][m.pred_record].track_id;
      if (last_id[m.gt_object] >= 0 && last_id[m.gt_object] != id) {
        ++counts.idsw;
      }
      last_id[m.gt_object] = id;
    }
  }
  return counts;
}

// Exact min-cost assignment on an n x m matrix, n <= m. Returns row -> col.
std::vector<int> hungarian(const std::vector<std::vector<long long>>& a) {
  int n = static_cast<int>(a.size());
  int m = static_cast<int>(a[0].size());
  std::vector<long long> u(n + 1, 0), v(m + 1, 0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<long long> minv(m + 1, LLONG_MAX);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = -1;
      long long delta = LLONG_MAX;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        long long cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

double iou(const Box& a, const Box& b) {
  require(a.well_formed() && b.well_formed(),
          "iou requires boxes with non-negative extent");
  double inter = intersection_area(a, b);
  double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

TrackAssignment greedy_iou_tracker(
    const std::vector<std::vector<Box>>& detections_per_frame,
    double iou_threshold) {
  require(iou_threshold > 0.0 && iou_threshold < 1.0,
          "iou threshold must lie in (0,1)");
  TrackAssignment out;
  out.frames.reserve(detections_per_frame.size());
  std::vector<TrackRecord> active;
  for (const auto& dets : detections_per_frame) {
    struct Cand {
      double overlap;
      int det;
      int track_id;
      int track_slot;
    };
    std::vector<Cand> cands;
    for (int d = 0; d < static_cast<int>(dets.size()); ++d) {
      for (int s = 0; s < static_cast<int>(active.size()); ++s) {
        double o = iou(dets[d], active[s].box);
        if (o >= iou_threshold) {
          cands.push_back({o, d, active[s].track_id, s});
        }
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      if (a.overlap != b.overlap) return a.overlap > b.overlap;
      if (a.det != b.det) return a.det < b.det;
      return a.track_id < b.track_id;
    });
    std::vector<char> det_assigned(dets.size(), 0);
    std::vector<char> track_used(active.size(), 0);
    std::vector<TrackRecord> frame(dets.size());
    for (const Cand& c : cands) {
      if (det_assigned[c.det] || track_used[c.track_slot]) continue;
      det_assigned[c.det] = 1;
      track_used[c.track_slot] = 1;
      frame[c.det] = TrackRecord{c.det, c.track_id, dets[c.det]};
    }
    for (int d = 0; d < static_cast<int>(dets.size()); ++d) {
      if (!det_assigned[d]) {
        frame[d] = TrackRecord{d, out.next_id++, dets[d]};
      }
    }
    active = frame;
    out.frames.push_back(std::move(frame));
  }
  return out;
}

std::vector<FrameMatch> match_frame(const ScenarioTruth& truth, int frame,
                                    const TrackAssignment& assignment,
                                    double iou_threshold) {
  struct Cand {
    double overlap;
    int gt;
    int rec;
  };
  std::vector<Cand> cands;
  const auto& preds = assignment.frames[frame];
  for (int g = 0; g < static_cast<int>(truth.objects.size()); ++g) {
    const auto& gt_box = truth.objects[g].boxes[frame];
    if (!gt_box.has_value()) continue;
    for (int r = 0; r < static_cast<int>(preds.size()); ++r) {
      double o = iou(*gt_box, preds[r].box);
      if (o >= iou_threshold) cands.push_back({o, g, r});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.overlap != b.overlap) return a.overlap > b.overlap;
    if (a.gt != b.gt) return a.gt < b.gt;
    return a.rec < b.rec;
  });
  std::vector<char> gt_used(truth.objects.size(), 0);
  std::vector<char> rec_used(preds.size(), 0);
  std::vector<FrameMatch> matches;
  for (const Cand& c : cands) {
    if (gt_used[c.gt] || rec_used[c.rec]) continue;
    gt_used[c.gt] = 1;
    rec_used[c.rec] = 1;
    matches.push_back({c.gt, c.rec});
  }
  return matches;
}

int count_idsw(const ScenarioTruth& truth, const TrackAssignment& assignment,
               double iou_threshold) {
  check_inputs(truth, assignment, iou_threshold);
  return clear_counts(truth, assignment, iou_threshold).idsw;
}

double mota(const ScenarioTruth& truth, const TrackAssignment& assignment,
            double iou_threshold) {
  check_inputs(truth, assignment, iou_threshold);
  ClearCounts c = clear_counts(truth, assignment, iou_threshold);
  if (c.gt_total == 0) {
    throw UndefinedMetricError("mota is undefined with zero GT boxes");
  }
  return 1.0 - static_cast<double>(c.fn + c.fp + c.idsw) / c.gt_total;
}

double idf1(const ScenarioTruth& truth, const TrackAssignment& assignment,
            double iou_threshold) {
  check_inputs(truth, assignment, iou_threshold);
  int gt_total = truth.total_gt_boxes();
  if (gt_total == 0) {
    throw UndefinedMetricError("idf1 is undefined with zero GT boxes");
  }

  int pred_total = 0;
  for (int f = 0; f < truth.n_frames; ++f) {
    pred_total += static_cast<int>(assignment.frames[f].size());
  }
  // Predicted trajectories grouped by id, ascending.
  std::map<int, std::vector<std::optional<Box>>> pred_tracks;
  for (int f = 0; f < truth.n_frames; ++f) {
    for (const TrackRecord& r : assignment.frames[f]) {
      auto& traj = pred_tracks[r.track_id];
      if (traj.empty()) traj.resize(truth.n_frames);
      traj[f] = r.box;
    }
  }

  int n_gt = static_cast<int>(truth.objects.size());
  int n_pred = static_cast<int>(pred_tracks.size());
  long long idtp = 0;
  if (n_gt > 0 && n_pred > 0) {
    // Overlap count matrix: frames where GT g and prediction p both exist
    // and pass the IoU gate.
    std::vector<std::vector<long long>> w(
        n_gt, std::vector<long long>(n_pred, 0));
    int p_idx = 0;
    for (const auto& [id, traj] : pred_tracks) {
      (void)id;
      for (int g = 0; g < n_gt; ++g) {
        long long overlap = 0;
        for (int f = 0; f < truth.n_frames; ++f) {
          const auto& gb = truth.objects[g].boxes[f];
          if (!gb.has_value() || !traj[f].has_value()) continue;
          if (iou(*gb, *traj[f]) >= iou_threshold) ++overlap;
        }
        w[g][p_idx] = overlap;
      }
      ++p_idx;
    }
    // Maximize total overlap with an exact assignment (negated min-cost).
    bool transposed = n_gt > n_pred;
    int n = transposed ? n_pred : n_gt;
    int m = transposed ? n_gt : n_pred;
    std::vector<std::vector<long long>> cost(n,
                                             std::vector<long long>(m, 0));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        cost[i][j] = -(transposed ? w[j][i] : w[i][j]);
      }
    }
    std::vector<int> row_to_col = hungarian(cost);
    for (int i = 0; i < n; ++i) {
      if (row_to_col[i] >= 0) idtp += -cost[i][row_to_col[i]];
    }
  }

  long long idfn = gt_total - idtp;
  long long idfp = pred_total - idtp;
  double denom = static_cast<double>(2 * idtp + idfp + idfn);
  if (denom <= 0.0) return 0.0;
  return static_cast<double>(2 * idtp) / denom;
}

MotScores evaluate(const ScenarioTruth& truth,
                   const TrackAssignment& assignment, double iou_threshold) {
  check_inputs(truth, assignment, iou_threshold);
  ClearCounts c = clear_counts(truth, assignment, iou_threshold);
  if (c.gt_total == 0) {
    throw UndefinedMetricError("metrics are undefined with zero GT boxes");
  }
  MotScores s;
  s.idsw = c.idsw;
  s.fp = c.fp;
  s.fn = c.fn;
  s.gt_total = c.gt_total;
  s.mota = 1.0 - static_cast<double>(c.fn + c.fp + c.idsw) / c.gt_total;
  s.idf1 = idf1(truth, assignment, iou_threshold);
  return s;
}

}  // namespace trivid::metrics
