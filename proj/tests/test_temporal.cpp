/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "test_helpers.hpp"
#include "trivid/error.hpp"
#include "trivid/rng.hpp"
#include "trivid/temporal.hpp"

using namespace trivid;
using namespace trivid::temporal;

namespace {

Frame uniform_frame(int w, int h, uint8_t v, int index = 0) {
  Frame f = Frame::filled(w, h, {v, v, v}, index);
  return f;
}

// J recomputed from scratch for a fixed kept mask as a function of params;
// used as the finite-difference target for the analytic gradient.
double objective_at(const PolicyParams& params,
                    const std::vector<std::vector<double>>& features,
                    const std::vector<uint8_t>& kept, double reward_value,
                    const ObjectiveConfig& config) {
  double log_sum = 0.0;
  double reg = 0.0;
  for (size_t i = 0; i < features.size(); ++i) {
    double g = policy_score(params, features[i]);
    log_sum += kept[i] ? std::log(g) : std::log(1.0 - g);
    reg += (g - config.mu) * (g - config.mu);
  }
  return -reward_value * log_sum + config.alpha * reg;
}

TrainingScenario static_object_scenario(int n_frames) {
  TrainingScenario ts;
  ts.truth.n_frames = n_frames;
  ts.truth.spec.width = 100;
  ts.truth.spec.height = 100;
  ts.truth.spec.n_frames = n_frames;
  ts.truth.spec.n_objects = 1;
  ObjectTrack track;
  track.id = 0;
  Box b{10, 10, 30, 30};
  for (int f = 0; f < n_frames; ++f) {
    track.boxes.push_back(b);
    ts.truth.detections.push_back({b});
    ts.features.push_back({0.0, 0.0, 0.0, 0.0, 1.0});
  }
  ts.truth.objects.push_back(std::move(track));
  return ts;
}

}  // namespace

TEST_CASE("frame features on a hand-built pair of frames") {
  // 8x8 frames, so every grid cell is a single pixel.
  Frame prev = uniform_frame(8, 8, 10);
  Frame cur = uniform_frame(8, 8, 10, 1);
  cur.at(0, 0, 0) = 42;
  cur.at(1, 0, 0) = 42;
  cur.at(2, 0, 0) = 42;

  std::vector<double> f = frame_features(&prev, cur);
  REQUIRE(f.size() == kFeatureCount);
  CHECK(f[0] == doctest::Approx(32.0 / 64.0).epsilon(1e-9));  // mean |diff|
  CHECK(f[1] == doctest::Approx(32.0).epsilon(1e-9));         // hottest cell
  CHECK(f[2] == doctest::Approx(1.0 / 64.0).epsilon(1e-9));   // moved pixels
  // One pixel at 42, 63 at 10: population stddev = sqrt(15.75).
  CHECK(f[3] == doctest::Approx(std::sqrt(15.75)).epsilon(1e-9));
  CHECK(f[4] == 1.0);
}

TEST_CASE("frame features without a predecessor") {
  Frame cur = uniform_frame(8, 8, 50);
  std::vector<double> f = frame_features(nullptr, cur);
  CHECK(f[0] == 0.0);
  CHECK(f[1] == 0.0);
  CHECK(f[2] == 0.0);
  CHECK(f[3] == doctest::Approx(0.0));  // uniform frame
  CHECK(f[4] == 1.0);
}

TEST_CASE("identical frames give zero difference features") {
  Frame a = uniform_frame(16, 12, 90);
  std::vector<double> f = frame_features(&a, a);
  CHECK(f[0] == 0.0);
  CHECK(f[1] == 0.0);
  CHECK(f[2] == 0.0);
}

TEST_CASE("policy score is a clamped logistic") {
  PolicyParams p;
  std::vector<double> phi = {2.0, 0.0, 0.0, 0.0, 0.0};
  CHECK(policy_score(p, phi) == doctest::Approx(0.5));
  p.weights[0] = 1.0;
  CHECK(policy_score(p, phi) ==
        doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-12));
  p.bias = 50.0;
  CHECK(policy_score(p, phi) == doctest::Approx(1.0 - 1e-6));
  p.bias = -50.0;
  p.weights[0] = 0.0;
  CHECK(policy_score(p, phi) == doctest::Approx(1e-6));
}

TEST_CASE("sampled selections follow the scores") {
  std::vector<double> hi(50, 1.0 - 1e-6);
  Rng rng(3);
  SelectionOutcome all = sample_selection(hi, rng);
  CHECK(all.n_prime == 50);
  for (double lp : all.log_probs) {
    CHECK(lp == doctest::Approx(std::log(1.0 - 1e-6)));
  }

  std::vector<double> mid(1000, 0.7);
  Rng rng2(4);
  SelectionOutcome s = sample_selection(mid, rng2);
  double kept_fraction = static_cast<double>(s.n_prime) / 1000.0;
  CHECK(kept_fraction > 0.66);
  CHECK(kept_fraction < 0.74);
  CHECK(s.drop_ratio() == doctest::Approx(1.0 - kept_fraction));

  // Same rng state reproduces the draw.
  Rng rng3(4);
  SelectionOutcome t = sample_selection(mid, rng3);
  CHECK(t.kept == s.kept);
}

TEST_CASE("selection_from_mask mirrors the sampling bookkeeping") {
  std::vector<double> scores = {0.8, 0.6};
  SelectionOutcome o = selection_from_mask(scores, {1, 0});
  CHECK(o.n_prime == 1);
  CHECK(o.log_probs[0] == doctest::Approx(std::log(0.8)));
  CHECK(o.log_probs[1] == doctest::Approx(std::log(0.4)));
}

TEST_CASE("objective matches hand arithmetic") {
  SelectionOutcome o = selection_from_mask({0.8, 0.6}, {1, 0});
  ObjectiveConfig cfg;
  cfg.alpha = 0.5;
  cfg.mu = 0.6;
  double j = objective(o, -0.5, cfg);
  // 0.5*(ln 0.8 + ln 0.4) + 0.5*(0.2^2 + 0) computed independently.
  double want = 0.5 * (std::log(0.8) + std::log(0.4)) + 0.5 * 0.04;
  CHECK(j == doctest::Approx(want).epsilon(1e-15));
  CHECK(j == doctest::Approx(-0.5497171416).epsilon(1e-9));

  // alpha = 0, R = 0 collapses to zero.
  ObjectiveConfig zero;
  zero.alpha = 0.0;
  CHECK(objective(o, 0.0, zero) == 0.0);

  // Scores pinned at mu kill the regularizer for any alpha.
  SelectionOutcome at_mu = selection_from_mask({0.6, 0.6}, {1, 1});
  ObjectiveConfig big;
  big.alpha = 123.0;
  big.mu = 0.6;
  CHECK(objective(at_mu, 0.0, big) == doctest::Approx(0.0));
}

TEST_CASE("gradient matches central finite differences") {
  Rng rng(17);
  ObjectiveConfig cfg;
  cfg.alpha = 0.5;
  cfg.mu = 0.6;
  for (int trial = 0; trial < 10; ++trial) {
    int n = 3 + static_cast<int>(rng.below(5));
    PolicyParams params;
    for (double& w : params.weights) w = rng.uniform(-1.0, 1.0);
    params.bias = rng.uniform(-1.0, 1.0);
    std::vector<std::vector<double>> features;
    for (int i = 0; i < n; ++i) {
      std::vector<double> phi(kFeatureCount);
      for (double& x : phi) x = rng.uniform(-2.0, 2.0);
      phi.back() = 1.0;
      features.push_back(std::move(phi));
    }
    std::vector<double> scores;
    std::vector<uint8_t> kept;
    for (const auto& phi : features) {
      scores.push_back(policy_score(params, phi));
      kept.push_back(rng.bernoulli(0.6) ? 1 : 0);
    }
    SelectionOutcome outcome = selection_from_mask(scores, kept);
    double reward_value = rng.uniform(-1.0, 0.0);

    std::vector<double> grad =
        policy_gradient(outcome, reward_value, features, cfg);
    REQUIRE(grad.size() == kFeatureCount + 1);

    const double h = 1e-6;
    for (int d = 0; d <= kFeatureCount; ++d) {
      PolicyParams lo = params, hi = params;
      if (d < kFeatureCount) {
        lo.weights[static_cast<size_t>(d)] -= h;
        hi.weights[static_cast<size_t>(d)] += h;
      } else {
        lo.bias -= h;
        hi.bias += h;
      }
      double fd = (objective_at(hi, features, kept, reward_value, cfg) -
                   objective_at(lo, features, kept, reward_value, cfg)) /
                  (2.0 * h);
      double denom = std::max(1.0, std::abs(fd));
      CHECK(std::abs(grad[static_cast<size_t>(d)] - fd) / denom < 1e-5);
    }
  }
}

TEST_CASE("gradient is zero when both terms vanish") {
  SelectionOutcome o = selection_from_mask({0.6, 0.6, 0.6}, {1, 1, 0});
  std::vector<std::vector<double>> features(3,
                                            {1.0, 2.0, 3.0, 4.0, 1.0});
  ObjectiveConfig cfg;
  cfg.alpha = 0.0;
  std::vector<double> grad = policy_gradient(o, 0.0, features, cfg);
  for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("reward is minus switches per kept frame") {
  ScenarioSpec spec;
  spec.n_objects = 2;
  spec.n_frames = 16;
  ScenarioTruth truth = synth_scenario(spec, 21);
  std::vector<uint8_t> all(static_cast<size_t>(truth.n_frames), 1);
  double r = reward(truth, all, 0.3);
  // Identity selection reproduces the full-sequence tracker metrics.
  auto full = metrics::greedy_iou_tracker(truth.detections, 0.3);
  int idsw = metrics::count_idsw(truth, full, 0.3);
  CHECK(r == doctest::Approx(-static_cast<double>(idsw) / truth.n_frames));

  std::vector<uint8_t> one(static_cast<size_t>(truth.n_frames), 0);
  one[0] = 1;
  CHECK_THROWS_AS(reward(truth, one, 0.3), DegenerateSelectionError);
}

TEST_CASE("uniform_drop spreads drops evenly") {
  SUBCASE("ratio 0 keeps everything") {
    std::vector<uint8_t> keep = uniform_drop(10, 0.0);
    CHECK(std::accumulate(keep.begin(), keep.end(), 0) == 10);
  }
  SUBCASE("n=10 ratio=0.4 drops exactly 4, evenly") {
    std::vector<uint8_t> keep = uniform_drop(10, 0.4);
    std::vector<int> dropped;
    for (int i = 0; i < 10; ++i) {
      if (!keep[static_cast<size_t>(i)]) dropped.push_back(i);
    }
    REQUIRE(dropped.size() == 4);
    for (size_t i = 1; i < dropped.size(); ++i) {
      CHECK(dropped[i] - dropped[i - 1] <= 3);  // ceil(10/4)
    }
  }
  SUBCASE("drop count is exact across n and ratio") {
    for (int n : {1, 7, 10, 48, 100}) {
      for (double ratio : {0.0, 0.1, 0.15, 1.0 / 3.0, 0.5, 0.9}) {
        std::vector<uint8_t> keep = uniform_drop(n, ratio);
        int kept = std::accumulate(keep.begin(), keep.end(), 0);
        CHECK(n - kept == static_cast<int>(n * ratio + 1e-9));
      }
    }
  }
}

TEST_CASE("random_drop hits the exact count reproducibly") {
  Rng rng(5);
  std::vector<uint8_t> keep = random_drop(10, 0.4, rng);
  CHECK(std::accumulate(keep.begin(), keep.end(), 0) == 6);
  Rng rng2(5);
  CHECK(random_drop(10, 0.4, rng2) == keep);
  Rng rng3(6);
  // A different seed reshuffles (with overwhelming probability).
  bool same = random_drop(10, 0.4, rng3) == keep;
  Rng rng4(7);
  same = same && random_drop(10, 0.4, rng4) == keep;
  CHECK_FALSE(same);
}

TEST_CASE("training is deterministic and a zero rate freezes params") {
  ScenarioSpec spec;
  spec.n_objects = 2;
  spec.n_frames = 12;
  spec.motion = MotionModel::kCrossing;
  std::vector<TrainingScenario> scenarios = {
      make_training_scenario(synth_scenario(spec, 2)),
      make_training_scenario(synth_scenario(spec, 3)),
  };
  ObjectiveConfig cfg;
  cfg.episodes = 6;
  cfg.seed = 9;

  TrainResult a = train_policy(scenarios, cfg);
  TrainResult b = train_policy(scenarios, cfg);
  REQUIRE(a.trace.size() == 6);
  CHECK(a.params.weights == b.params.weights);
  CHECK(a.params.bias == b.params.bias);
  for (size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].mean_reward == b.trace[i].mean_reward);
    CHECK(a.trace[i].objective_value == b.trace[i].objective_value);
  }

  ObjectiveConfig frozen = cfg;
  frozen.learning_rate = 0.0;
  TrainResult c = train_policy(scenarios, frozen);
  CHECK(c.params.weights == std::vector<double>(kFeatureCount, 0.0));
  CHECK(c.params.bias == 0.0);
}

TEST_CASE("strong regularizer pulls scores toward mu") {
  // One static object: every selection tracks perfectly, so the reward term
  // is identically zero and training reduces to the regularizer.
  std::vector<TrainingScenario> scenarios = {static_object_scenario(8)};
  ObjectiveConfig cfg;
  cfg.alpha = 100.0;
  cfg.mu = 0.6;
  cfg.learning_rate = 0.001;
  cfg.episodes = 500;
  cfg.seed = 1;
  TrainResult result = train_policy(scenarios, cfg);
  double g = policy_score(result.params, {0.0, 0.0, 0.0, 0.0, 1.0});
  CHECK(std::abs(g - 0.6) < 0.05);
}

TEST_CASE("policy params json round trip") {
  PolicyParams p;
  p.weights = {0.5, -1.25, 0.0, 3.5, -0.875};
  p.bias = 0.125;
  Json j = policy_params_to_json(p);
  PolicyParams back = policy_params_from_json(j);
  CHECK(back.weights == p.weights);
  CHECK(back.bias == p.bias);
  Json bad = j;
  bad["weights"] = {1.0, 2.0};
  CHECK_THROWS_AS(policy_params_from_json(bad), FormatError);
}
