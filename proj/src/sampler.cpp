#include "railcom/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include <json.hpp>

namespace railcom {

double event_score(const EventCounts& counts, const SamplerConfig& cfg) {
  return cfg.w_new * static_cast<double>(counts.new_tracks) +
         cfg.w_moving * static_cast<double>(counts.moving) +
         cfg.w_lost * static_cast<double>(counts.lost_transitions);
}

std::vector<EventCounts> count_events(const MotionAnnotatedScenario& mas) {
  const auto& frames = mas.tracked.scenario.frames;
  std::vector<EventCounts> out(frames.size());
  std::unordered_map<std::int64_t, std::size_t> pos;
  for (std::size_t i = 0; i < frames.size(); ++i) pos[frames[i].frame_index] = i;
  for (std::size_t ti = 0; ti < mas.tracked.tracks.size(); ++ti) {
    const Track& tr = mas.tracked.tracks[ti];
    if (!tr.history.empty()) {
      auto it = pos.find(tr.history.front().first);
      if (it != pos.end()) ++out[it->second].new_tracks;
    }
    for (const auto& s : mas.samples[ti])
      if (s.state == KinematicState::Moving) {
        auto it = pos.find(s.frame_index);
        if (it != pos.end()) ++out[it->second].moving;
      }
    for (const auto& [a, b] : tr.lost_spans) {
      auto it = pos.find(a);
      if (it != pos.end()) ++out[it->second].lost_transitions;
    }
  }
  return out;
}

std::pair<double, std::int64_t> allocate_budget(const std::vector<double>& scores,
                                                const SamplerConfig& cfg) {
  if (scores.empty()) throw std::invalid_argument("allocate_budget: empty score list");
  if (cfg.k_max < 3) throw std::invalid_argument("allocate_budget: k_max must be >= 3");
  if (cfg.tau_low > cfg.tau_high)
    throw std::invalid_argument("allocate_budget: tau_low > tau_high");
  const double s = std::accumulate(scores.begin(), scores.end(), 0.0);
  std::int64_t k;
  if (s >= cfg.tau_high)
    k = cfg.k_max;
  else if (s >= cfg.tau_low)
    k = std::max<std::int64_t>(3, static_cast<std::int64_t>(std::floor(cfg.alpha * cfg.k_max)));
  else
    k = 2;
  return {s, k};
}

std::vector<std::int64_t> select_keyframes(const std::vector<double>& scores, std::int64_t k) {
  if (k < 2) throw std::invalid_argument("select_keyframes: K must be >= 2");
  const std::int64_t t = static_cast<std::int64_t>(scores.size());
  if (t < 1) throw std::invalid_argument("select_keyframes: empty sequence");
  std::vector<std::int64_t> out;
  if (t <= k) {
    out.resize(t);
    std::iota(out.begin(), out.end(), 1);
    return out;
  }
  const std::int64_t segs = k - 1;
  const std::int64_t span = t - 1;  // frames 1..T-1
  for (std::int64_t seg = 1; seg <= segs; ++seg) {
    const std::int64_t lo = (seg - 1) * span / segs + 1;
    const std::int64_t hi = seg * span / segs;
    std::int64_t best = lo;
    for (std::int64_t f = lo + 1; f <= hi; ++f)
      if (scores[f - 1] > scores[best - 1]) best = f;  // earliest frame wins ties
    out.push_back(best);
  }
  out.push_back(t);
  return out;
}

std::pair<double, double> calibrate_thresholds(const std::vector<double>& complexities) {
  if (complexities.empty()) throw std::invalid_argument("calibrate_thresholds: empty list");
  std::vector<double> sorted = complexities;
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  auto nearest_rank = [&](double p) {
    auto rank = static_cast<std::size_t>(std::ceil(p * n));
    return sorted[std::max<std::size_t>(rank, 1) - 1];
  };
  return {nearest_rank(0.25), nearest_rank(0.75)};
}

SamplingPlan plan_sampling(const MotionAnnotatedScenario& mas, const SamplerConfig& cfg) {
  SamplingPlan plan;
  for (const auto& c : count_events(mas)) plan.scores.push_back(event_score(c, cfg));
  auto [s, k] = allocate_budget(plan.scores, cfg);
  plan.complexity = s;
  plan.budget = k;
  plan.keyframes = select_keyframes(plan.scores, k);
  return plan;
}

std::string serialize_plan_json(const SamplingPlan& plan, const SamplerConfig& cfg) {
  nlohmann::json j;
  j["scores"] = plan.scores;
  j["S"] = plan.complexity;
  j["K"] = plan.budget;
  j["keyframes"] = plan.keyframes;
  j["tau_low"] = cfg.tau_low;
  j["tau_high"] = cfg.tau_high;
  return j.dump(2);
}

}  // namespace railcom
