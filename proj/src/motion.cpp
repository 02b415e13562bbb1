#include "railcom/motion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace railcom {

Vec2 motion_vector(const Point& curr_center, const Point& prev_center, std::int64_t dt) {
  if (dt < 1) throw std::invalid_argument("motion_vector: dt must be >= 1");
  const double g = static_cast<double>(dt);
  return {(curr_center.x - prev_center.x) / g, (curr_center.y - prev_center.y) / g};
}

double area_change_rate(double curr_area, double prev_area) {
  return (curr_area - prev_area) / prev_area;
}

double dynamic_threshold(double width, const MotionConfig& cfg) {
  return std::max(cfg.tau_min, cfg.lambda_scale * width);
}

KinematicState kinematic_state(const Vec2& v, double rho, double width, const MotionConfig& cfg) {
  if (v.norm() >= dynamic_threshold(width, cfg) || std::abs(rho) > cfg.gamma)
    return KinematicState::Moving;
  return KinematicState::Static;
}

namespace {

std::vector<MotionSample> annotate_track(const Track& tr, const MotionConfig& cfg) {
  std::vector<MotionSample> out;
  out.reserve(tr.history.size());
  for (std::size_t i = 0; i < tr.history.size(); ++i) {
    const auto& [frame, det] = tr.history[i];
    MotionSample s;
    s.track_id = tr.track_id;
    s.frame_index = frame;
    s.tau_dyn = dynamic_threshold(det.width(), cfg);
    if (i == 0) {
      // First observation: no reference, default to the non-alarming state.
      s.velocity = {0.0, 0.0};
      s.area_rate = 0.0;
      s.state = KinematicState::Static;
    } else {
      const auto& [pframe, pdet] = tr.history[i - 1];
      const std::int64_t stride = frame - pframe;  // > 1 across occlusion gaps
      s.velocity = motion_vector(det.center(), pdet.center(), stride);
      s.area_rate = area_change_rate(det.area(), pdet.area());
      s.state = kinematic_state(s.velocity, s.area_rate, det.width(), cfg);
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace

const MotionSample* MotionAnnotatedScenario::sample_at(std::int64_t track_id,
                                                       std::int64_t frame_index) const {
  for (std::size_t ti = 0; ti < tracked.tracks.size(); ++ti) {
    if (tracked.tracks[ti].track_id != track_id) continue;
    for (const auto& s : samples[ti])
      if (s.frame_index == frame_index) return &s;
  }
  return nullptr;
}

MotionAnnotatedScenario annotate_motion_serial(const TrackedScenario& ts, const MotionConfig& cfg) {
  MotionAnnotatedScenario out;
  out.tracked = ts;
  out.samples.resize(ts.tracks.size());
  for (std::size_t ti = 0; ti < ts.tracks.size(); ++ti)
    out.samples[ti] = annotate_track(ts.tracks[ti], cfg);
  return out;
}

MotionAnnotatedScenario annotate_motion(const TrackedScenario& ts, const MotionConfig& cfg) {
  MotionAnnotatedScenario out;
  out.tracked = ts;
  out.samples.resize(ts.tracks.size());
  const std::int64_t n = static_cast<std::int64_t>(ts.tracks.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t ti = 0; ti < n; ++ti)
    out.samples[ti] = annotate_track(ts.tracks[ti], cfg);
  return out;
}

std::string serialize_annotated_jsonl(const MotionAnnotatedScenario& mas) {
  using nlohmann::json;
  std::string out;
  for (const auto& f : mas.tracked.scenario.frames) {
    json j;
    j["frame"] = f.frame_index;
    if (f.timestamp_ms) j["ts_ms"] = *f.timestamp_ms;
    if (f.image_ref) j["image"] = *f.image_ref;
    j["detections"] = json::array();
    for (const auto& d : f.detections) {
      json dj;
      dj["x1"] = d.x1;
      dj["y1"] = d.y1;
      dj["x2"] = d.x2;
      dj["y2"] = d.y2;
      dj["class"] = d.class_name;
      dj["score"] = d.score;
      if (d.track_id) {
        dj["id"] = *d.track_id;
        if (const MotionSample* s = mas.sample_at(*d.track_id, f.frame_index)) {
          dj["vx"] = s->velocity.x;
          dj["vy"] = s->velocity.y;
          dj["rho"] = s->area_rate;
          dj["state"] = s->state == KinematicState::Moving ? "Moving" : "Static";
        }
      }
      j["detections"].push_back(std::move(dj));
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace railcom
