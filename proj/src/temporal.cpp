/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include "trivid/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trivid/error.hpp"
#include "trivid/metrics.hpp"

namespace trivid::temporal {

const char* const kFeatureNames[kFeatureCount] = {
    "mean_abs_diff", "max_cell_mean_diff", "motion_fraction", "gray_std",
    "one"};

namespace {

constexpr double kScoreFloor = 1e-6;
constexpr double kScoreCeil = 1.0 - 1e-6;
constexpr double kMotionPixelThreshold = 10.0;
constexpr int kCellGrid = 8;
constexpr uint64_t kEpisodeStream = 0x45500001ull;

double clamp_score(double p) {
  return std::min(kScoreCeil, std::max(kScoreFloor, p));
}

}  // namespace

void PolicyParams::validate() const {
  require(static_cast<int>(weights.size()) == kFeatureCount,
          "policy weight count must match the feature count");
  for (double w : weights) {
    require(std::isfinite(w), "policy weights must be finite");
  }
  require(std::isfinite(bias), "policy bias must be finite");
}

double SelectionOutcome::drop_ratio() const {
  if (kept.empty()) return 0.0;
  return 1.0 - static_cast<double>(n_prime) / static_cast<double>(kept.size());
}

void ObjectiveConfig::validate() const {
  require(alpha >= 0.0 && std::isfinite(alpha), "alpha must be >= 0");
  require(mu > 0.0 && mu < 1.0, "mu must lie in (0,1)");
  require(std::isfinite(learning_rate) && learning_rate >= 0.0,
          "learning rate must be >= 0");
  require(episodes >= 1, "episode count must be >= 1");
  require(iou_threshold > 0.0 && iou_threshold < 1.0,
          "iou threshold must lie in (0,1)");
}

std::vector<double> frame_features(const Frame* prev, const Frame& cur) {
  cur.validate();
  GrayPlane g = rgb_to_gray(cur);
  size_t n = g.values.size();

  double mean = 0.0;
  for (float v : g.values) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (float v : g.values) var += (v - mean) * (v - mean);
  double gray_std = std::sqrt(var / static_cast<double>(n));

  std::vector<double> phi(kFeatureCount, 0.0);
  phi[3] = gray_std;
  phi[4] = 1.0;
  if (prev == nullptr) return phi;

  require(prev->width == cur.width && prev->height == cur.height,
          "consecutive frames must share dimensions");
  GrayPlane p = rgb_to_gray(*prev);

  double sum_diff = 0.0;
  int motion_pixels = 0;
  double cell_sum[kCellGrid][kCellGrid] = {};
  int cell_count[kCellGrid][kCellGrid] = {};
  for (int y = 0; y < cur.height; ++y) {
    int cy = std::min(kCellGrid - 1, y * kCellGrid / cur.height);
    for (int x = 0; x < cur.width; ++x) {
      double d = std::fabs(static_cast<double>(g.at(x, y)) - p.at(x, y));
      sum_diff += d;
      if (d > kMotionPixelThreshold) ++motion_pixels;
      int cx = std::min(kCellGrid - 1, x * kCellGrid / cur.width);
      cell_sum[cy][cx] += d;
      cell_count[cy][cx] += 1;
    }
  }
  double max_cell = 0.0;
  for (int r = 0; r < kCellGrid; ++r) {
    for (int c = 0; c < kCellGrid; ++c) {
      if (cell_count[r][c] == 0) continue;
      max_cell = std::max(max_cell, cell_sum[r][c] / cell_count[r][c]);
    }
  }
  phi[0] = sum_diff / static_cast<double>(n);
  phi[1] = max_cell;
  phi[2] = static_cast<double>(motion_pixels) / static_cast<double>(n);
  return phi;
}

std::vector<std::vector<double>> sequence_features(
    const VideoSequence& video) {
  std::vector<std::vector<double>> out;
  out.reserve(video.frames.size());
  for (size_t i = 0; i < video.frames.size(); ++i) {
    const Frame* prev = i == 0 ? nullptr : &video.frames[i - 1];
    out.push_back(frame_features(prev, video.frames[i]));
  }
  return out;
}

double policy_score(const PolicyParams& params,
                    const std::vector<double>& features) {
  params.validate();
  require(features.size() == params.weights.size(),
          "feature vector length must match the policy weights");
  double z = params.bias;
  for (size_t i = 0; i < features.size(); ++i) {
    require(std::isfinite(features[i]), "features must be finite");
    z += params.weights[i] * features[i];
  }
  return clamp_score(1.0 / (1.0 + std::exp(-z)));
}

SelectionOutcome sample_selection(const std::vector<double>& scores,
                                  Rng& rng) {
  SelectionOutcome out;
  out.scores = scores;
  out.kept.resize(scores.size());
  out.log_probs.resize(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) {
    require(scores[i] > 0.0 && scores[i] < 1.0, "scores must lie in (0,1)");
    bool keep = rng.uniform() < scores[i];
    out.kept[i] = keep ? 1 : 0;
    out.log_probs[i] = keep ? std::log(scores[i]) : std::log1p(-scores[i]);
    if (keep) ++out.n_prime;
  }
  return out;
}

SelectionOutcome selection_from_mask(const std::vector<double>& scores,
                                     const std::vector<uint8_t>& kept) {
  require(scores.size() == kept.size(),
          "scores and keep mask must have equal length");
  SelectionOutcome out;
  out.scores = scores;
  out.kept = kept;
  out.log_probs.resize(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) {
    require(scores[i] > 0.0 && scores[i] < 1.0, "scores must lie in (0,1)");
    out.log_probs[i] =
        kept[i] ? std::log(scores[i]) : std::log1p(-scores[i]);
    if (kept[i]) ++out.n_prime;
  }
  return out;
}

double reward(const ScenarioTruth& truth, const std::vector<uint8_t>& kept,
              double iou_threshold) {
  require(static_cast<int>(kept.size()) == truth.n_frames,
          "keep mask length must match the scenario frame count");
  std::vector<int> frames;
  for (int i = 0; i < truth.n_frames; ++i) {
    if (kept[i]) frames.push_back(i);
  }
  if (frames.size() < 2) {
    throw DegenerateSelectionError(
        "reward needs at least two kept frames");
  }
  ScenarioTruth sub = restrict_to_frames(truth, frames);
  metrics::TrackAssignment assignment =
      metrics::greedy_iou_tracker(sub.detections, iou_threshold);
  int idsw = metrics::count_idsw(sub, assignment, iou_threshold);
  return -static_cast<double>(idsw) / static_cast<double>(frames.size());
}

double reward(const ScenarioTruth& truth, const SelectionOutcome& selection,
              double iou_threshold) {
  return reward(truth, selection.kept, iou_threshold);
}

double objective(const SelectionOutcome& outcome, double reward_value,
                 const ObjectiveConfig& config) {
  double log_sum = 0.0;
  double penalty = 0.0;
  for (size_t i = 0; i < outcome.scores.size(); ++i) {
    log_sum += outcome.log_probs[i];
    double d = outcome.scores[i] - config.mu;
    penalty += d * d;
  }
  return -reward_value * log_sum + config.alpha * penalty;
}

std::vector<double> policy_gradient(
    const SelectionOutcome& outcome, double reward_value,
    const std::vector<std::vector<double>>& features_per_frame,
    const ObjectiveConfig& config) {
  require(features_per_frame.size() == outcome.scores.size(),
          "one feature vector per frame is required");
  std::vector<double> grad(kFeatureCount + 1, 0.0);
  for (size_t i = 0; i < outcome.scores.size(); ++i) {
    require(features_per_frame[i].size() == kFeatureCount,
            "feature vector length must match the policy weights");
    double g = outcome.scores[i];
    // dJ/dz per frame; z is the pre-logistic activation.
    double dlogp_dz = outcome.kept[i] ? (1.0 - g) : -g;
    double dz = -reward_value * dlogp_dz +
                2.0 * config.alpha * (g - config.mu) * g * (1.0 - g);
    for (int k = 0; k < kFeatureCount; ++k) {
      grad[k] += dz * features_per_frame[i][k];
    }
    grad[kFeatureCount] += dz;
  }
  return grad;
}

TrainingScenario make_training_scenario(const ScenarioTruth& truth) {
  TrainingScenario out;
  out.truth = truth;
  out.features = sequence_features(render_scenario(truth));
  return out;
}

TrainResult train_policy(const std::vector<TrainingScenario>& scenarios,
                         const PolicyParams& init,
                         const ObjectiveConfig& config) {
  require(!scenarios.empty(), "training needs at least one scenario");
  config.validate();
  init.validate();
  for (const TrainingScenario& s : scenarios) {
    require(s.features.size() == static_cast<size_t>(s.truth.n_frames),
            "scenario features must cover every frame");
  }

  TrainResult result;
  result.params = init;
  result.trace.reserve(config.episodes);
  Rng root(config.seed, kEpisodeStream);

  for (int ep = 0; ep < config.episodes; ++ep) {
    Rng ep_rng = root.split(static_cast<uint64_t>(ep));
    std::vector<double> grad(kFeatureCount + 1, 0.0);
    double reward_sum = 0.0;
    double objective_sum = 0.0;
    double drop_sum = 0.0;
    int live = 0;

    for (size_t s = 0; s < scenarios.size(); ++s) {
      const TrainingScenario& sc = scenarios[s];
      std::vector<double> scores(sc.features.size());
      for (size_t i = 0; i < sc.features.size(); ++i) {
        scores[i] = policy_score(result.params, sc.features[i]);
      }
      Rng sc_rng = ep_rng.split(static_cast<uint64_t>(s));
      SelectionOutcome outcome = sample_selection(scores, sc_rng);
      drop_sum += outcome.drop_ratio();
      if (outcome.n_prime < 2) continue;
      double r = reward(sc.truth, outcome, config.iou_threshold);
      std::vector<double> g =
          policy_gradient(outcome, r, sc.features, config);
      for (size_t k = 0; k < grad.size(); ++k) grad[k] += g[k];
      reward_sum += r;
      objective_sum += objective(outcome, r, config);
      ++live;
    }

    TraceRow row;
    row.episode = ep;
    row.mean_drop_ratio = drop_sum / static_cast<double>(scenarios.size());
    if (live == 0) {
      row.skipped = true;
      result.trace.push_back(row);
      continue;
    }
    row.mean_reward = reward_sum / live;
    row.objective_value = objective_sum / live;
    result.trace.push_back(row);

    double scale = config.learning_rate / live;
    for (int k = 0; k < kFeatureCount; ++k) {
      result.params.weights[k] -= scale * grad[k];
    }
    result.params.bias -= scale * grad[kFeatureCount];
  }
  return result;
}

TrainResult train_policy(const std::vector<TrainingScenario>& scenarios,
                         const ObjectiveConfig& config) {
  return train_policy(scenarios, PolicyParams{}, config);
}

std::vector<uint8_t> uniform_drop(int n, double ratio) {
  require(n >= 0, "frame count must be >= 0");
  require(ratio >= 0.0 && ratio < 1.0, "drop ratio must lie in [0,1)");
  // Guard the product against representation error (e.g. 10 * 0.7).
  int64_t m = static_cast<int64_t>(std::floor(n * ratio + 1e-9));
  std::vector<uint8_t> kept(static_cast<size_t>(n), 1);
  if (m <= 0) return kept;
  for (int64_t i = 0; i < n; ++i) {
    if ((i + 1) * m / n > i * m / n) kept[static_cast<size_t>(i)] = 0;
  }
  return kept;
}

std::vector<uint8_t> random_drop(int n, double ratio, Rng& rng) {
  require(n >= 0, "frame count must be >= 0");
  require(ratio >= 0.0 && ratio < 1.0, "drop ratio must lie in [0,1)");
  int64_t m = static_cast<int64_t>(std::floor(n * ratio + 1e-9));
  std::vector<uint8_t> kept(static_cast<size_t>(n), 1);
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int64_t i = 0; i < m; ++i) {
    int64_t j =
        i + static_cast<int64_t>(rng.below(static_cast<uint64_t>(n - i)));
    std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
    kept[static_cast<size_t>(order[static_cast<size_t>(i)])] = 0;
  }
  return kept;
}

Json policy_params_to_json(const PolicyParams& params) {
  params.validate();
  Json j;
  j["features"] = Json::array();
  for (const char* name : kFeatureNames) j["features"].push_back(name);
  j["weights"] = params.weights;
  j["bias"] = params.bias;
  return j;
}

PolicyParams policy_params_from_json(const Json& j) {
  try {
    PolicyParams p;
    p.weights = j.at("weights").get<std::vector<double>>();
    p.bias = j.at("bias").get<double>();
    if (p.weights.size() != static_cast<size_t>(kFeatureCount)) {
      throw FormatError("policy JSON must carry one weight per feature");
    }
    p.validate();
    return p;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed policy JSON: ") + e.what());
  }
}

}  // namespace trivid::temporal
