/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trivid/frame.hpp"
#include "trivid/rng.hpp"
#include "trivid/scenario.hpp"

namespace trivid::temporal {

// Fixed feature order produced by frame_features. The last slot is a
// constant 1.0 so the scorer sees an explicit intercept feature.
inline constexpr int kFeatureCount = 5;
extern const char* const kFeatureNames[kFeatureCount];

// Logistic frame scorer: retain probability = logistic(w . phi + b).
struct PolicyParams {
  std::vector<double> weights = std::vector<double>(kFeatureCount, 0.0);
  double bias = 0.0;

  void validate() const;
};

// One stochastic retain/drop draw over a sequence.
// kept[i] => log_probs[i] = log(scores[i]); otherwise log(1 - scores[i]).
struct SelectionOutcome {
  std::vector<double> scores;
  std::vector<uint8_t> kept;
  std::vector<double> log_probs;
  int n_prime = 0;

  double drop_ratio() const;
};

struct ObjectiveConfig {
  double alpha = 0.5;
  double mu = 0.6;
  double learning_rate = 0.05;
  int episodes = 200;
  uint64_t seed = 1;
  double iou_threshold = 0.3;

  void validate() const;
};

// Difference-driven scores for one frame given its predecessor:
//   [mean |gray diff|, max 8x8-cell mean |gray diff|,
//    fraction of pixels with |gray diff| > 10, gray stddev of cur, 1.0]
// With no predecessor the three diff features are 0.
std::vector<double> frame_features(const Frame* prev, const Frame& cur);

// Features for every frame of a sequence (frame 0 has no predecessor).
std::vector<std::vector<double>> sequence_features(const VideoSequence& video);

// logistic(w . phi + b) clamped to [1e-6, 1 - 1e-6].
double policy_score(const PolicyParams& params,
                    const std::vector<double>& features);

// Independent Bernoulli(retain = scores[i]) draws.
SelectionOutcome sample_selection(const std::vector<double>& scores, Rng& rng);

// Builds the outcome a deterministic keep mask would have produced under
// these scores; used to evaluate baselines through the same reward path.
SelectionOutcome selection_from_mask(const std::vector<double>& scores,
                                     const std::vector<uint8_t>& kept);

// -IDSw / n' for the tracker re-run on the kept-frame subsequence.
// Fewer than two kept frames leaves the tracker run meaningless.
double reward(const ScenarioTruth& truth, const std::vector<uint8_t>& kept,
              double iou_threshold);
double reward(const ScenarioTruth& truth, const SelectionOutcome& selection,
              double iou_threshold);

// J = -R * sum(log p) + alpha * sum((G - mu)^2). Lower is better.
double objective(const SelectionOutcome& outcome, double reward_value,
                 const ObjectiveConfig& config);

// Analytic dJ/d(weights, bias); last element is the bias slot. Scores at the
// clamp boundary are treated as plain logistic values so the result stays
// finite there.
std::vector<double> policy_gradient(
    const SelectionOutcome& outcome, double reward_value,
    const std::vector<std::vector<double>>& features_per_frame,
    const ObjectiveConfig& config);

// Precomputed per-scenario training inputs: ground truth plus per-frame
// features of the rendered sequence.
struct TrainingScenario {
  ScenarioTruth truth;
  std::vector<std::vector<double>> features;
};

TrainingScenario make_training_scenario(const ScenarioTruth& truth);

struct TraceRow {
  int episode = 0;
  double mean_reward = 0.0;
  double mean_drop_ratio = 0.0;
  double objective_value = 0.0;
  bool skipped = false;  // every scenario drew a degenerate selection
};

struct TrainResult {
  PolicyParams params;
  std::vector<TraceRow> trace;
};

// Gradient descent on J: each episode draws one selection per scenario from
// a per-(episode, scenario) split stream, averages rewards and gradients
// over the non-degenerate draws, then takes one step. Deterministic per
// config.seed.
TrainResult train_policy(const std::vector<TrainingScenario>& scenarios,
                         const PolicyParams& init,
                         const ObjectiveConfig& config);
TrainResult train_policy(const std::vector<TrainingScenario>& scenarios,
                         const ObjectiveConfig& config);

// Evenly spaced drops hitting exactly floor(n * ratio) frames: frame i is
// dropped when the integer ramp floor((i+1)*m/n) advances. Returns keep
// bits.
std::vector<uint8_t> uniform_drop(int n, double ratio);

// Uniformly chosen floor(n * ratio) drops.
std::vector<uint8_t> random_drop(int n, double ratio, Rng& rng);

Json policy_params_to_json(const PolicyParams& params);
PolicyParams policy_params_from_json(const Json& j);

}  // namespace trivid::temporal
