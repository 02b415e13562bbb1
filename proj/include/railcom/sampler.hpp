#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "railcom/motion.hpp"

namespace railcom {

struct SamplerConfig {
  std::int64_t k_max = 8;   // >= 3
  double alpha = 0.5;       // (0, 1]
  double tau_low = 10.0;    // complexity thresholds, tau_low <= tau_high
  double tau_high = 30.0;
  double w_new = 2.0;       // event-score weights
  double w_moving = 1.0;
  double w_lost = 1.0;
};

struct EventCounts {
  std::int64_t new_tracks = 0;
  std::int64_t moving = 0;
  std::int64_t lost_transitions = 0;
};

struct SamplingPlan {
  std::vector<double> scores;         // s_t per frame, index aligned with frames
  double complexity = 0.0;            // S = sum of scores
  std::int64_t budget = 0;            // K
  std::vector<std::int64_t> keyframes;  // strictly increasing frame indices, last = T
};

double event_score(const EventCounts& counts, const SamplerConfig& cfg);

// Per-frame event counts for a motion-annotated scenario: track first
// appearances, Moving samples, and lost-span starts.
std::vector<EventCounts> count_events(const MotionAnnotatedScenario& mas);

// Piecewise budget from aggregate complexity: k_max at or above tau_high,
// max(3, floor(alpha * k_max)) in the middle band, 2 below tau_low.
std::pair<double, std::int64_t> allocate_budget(const std::vector<double>& scores,
                                                const SamplerConfig& cfg);

// Splits frames 1..T-1 into K-1 near-equal segments, takes the per-segment
// argmax (earliest frame on ties) and appends frame T. Frame numbering here
// is 1-based over the score vector.
std::vector<std::int64_t> select_keyframes(const std::vector<double>& scores, std::int64_t k);

std::pair<double, double> calibrate_thresholds(const std::vector<double>& complexities);

SamplingPlan plan_sampling(const MotionAnnotatedScenario& mas, const SamplerConfig& cfg);

std::string serialize_plan_json(const SamplingPlan& plan, const SamplerConfig& cfg);

}  // namespace railcom
