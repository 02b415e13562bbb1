#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "railcom/tracker.hpp"

namespace railcom {

struct MotionConfig {
  double tau_min = 2.0;      // px/frame noise floor
  double lambda_scale = 0.1; // width-conditioned scale factor
  double gamma = 0.15;       // area-rate sensitivity
  std::int64_t dt = 1;       // frame stride
};

enum class KinematicState { Moving, Static };

struct MotionSample {
  std::int64_t track_id = 0;
  std::int64_t frame_index = 0;
  Vec2 velocity;            // px/frame
  double area_rate = 0.0;   // dimensionless
  double tau_dyn = 0.0;     // px/frame
  KinematicState state = KinematicState::Static;

  friend bool operator==(const MotionSample&, const MotionSample&) = default;
};

struct MotionAnnotatedScenario {
  TrackedScenario tracked;
  // Samples per track, aligned with tracks[i].history.
  std::vector<std::vector<MotionSample>> samples;

  const MotionSample* sample_at(std::int64_t track_id, std::int64_t frame_index) const;
};

Vec2 motion_vector(const Point& curr_center, const Point& prev_center, std::int64_t dt);
double area_change_rate(double curr_area, double prev_area);
double dynamic_threshold(double width, const MotionConfig& cfg);
KinematicState kinematic_state(const Vec2& v, double rho, double width, const MotionConfig& cfg);

// Per-track motion annotation. Tracks are independent, so the default path
// runs the per-track loop under OpenMP; the serial variant is the reference
// the tests and the benchmark compare against.
MotionAnnotatedScenario annotate_motion(const TrackedScenario& ts, const MotionConfig& cfg);
MotionAnnotatedScenario annotate_motion_serial(const TrackedScenario& ts, const MotionConfig& cfg);

// JSONL with per-detection extension fields vx, vy, rho, state.
std::string serialize_annotated_jsonl(const MotionAnnotatedScenario& mas);

}  // namespace railcom
