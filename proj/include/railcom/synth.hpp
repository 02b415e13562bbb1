#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "railcom/motion.hpp"

namespace railcom {

struct ActorSpec {
  std::string class_name;
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;  // box at the first frame of the script
  Vec2 velocity;                          // px/frame center motion
  double area_growth = 0.0;               // per-frame relative area change
  double score = 0.9;
  std::vector<std::pair<std::int64_t, std::int64_t>> visible_spans;  // inclusive, within [1,T]
};

struct SynthSpec {
  std::string id = "synth";
  std::int64_t frames = 1;  // T
  std::int64_t width = 1920, height = 1080;
  std::vector<ActorSpec> actors;
  double noise_std = 0.0;  // center jitter, size preserved
  std::uint64_t seed = 0;
};

struct ActorFrameTruth {
  std::int64_t frame = 0;
  Point center;   // unjittered script value
  double area = 0.0;
  Vec2 velocity;  // stride-aware, zero on the first visible observation
  KinematicState state = KinematicState::Static;
};

struct ActorTruth {
  std::string class_name;
  std::vector<ActorFrameTruth> observations;
  std::vector<std::int64_t> appearance_frames;       // first frame of each span
  std::vector<std::int64_t> lost_transition_frames;  // frame after each non-final span
};

struct GroundTruth {
  std::vector<ActorTruth> actors;
};

std::pair<Scenario, GroundTruth> generate_scenario(const SynthSpec& spec,
                                                   const MotionConfig& motion_cfg = {});

// Named fixtures: intrusion_crossing, occlusion_gap, empty_track,
// approaching_object.
SynthSpec preset(const std::string& name);
std::vector<std::string> preset_names();

SynthSpec parse_synth_spec(const std::string& json_text);
std::string serialize_synth_spec(const SynthSpec& spec);
std::string serialize_ground_truth(const GroundTruth& gt);

}  // namespace railcom
