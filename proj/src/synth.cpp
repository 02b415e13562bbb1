#include "railcom/synth.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace railcom {

using nlohmann::json;

namespace {

struct ScriptBox {
  Point center;
  double w = 0, h = 0;
  double area() const { return w * h; }
};

// Box at 1-based frame t under the actor script: linear center motion,
// geometric area growth with aspect ratio preserved.
ScriptBox box_at(const ActorSpec& a, std::int64_t t) {
  const double k = static_cast<double>(t - 1);
  const double scale_sq = std::pow(1.0 + a.area_growth, k);
  if (scale_sq <= 0.0)
    throw std::invalid_argument("synth: area growth drives box out of positive area");
  const double scale = std::sqrt(scale_sq);
  ScriptBox b;
  b.center = {(a.x1 + a.x2) / 2.0 + a.velocity.x * k, (a.y1 + a.y2) / 2.0 + a.velocity.y * k};
  b.w = (a.x2 - a.x1) * scale;
  b.h = (a.y2 - a.y1) * scale;
  if (b.w <= 0.0 || b.h <= 0.0)
    throw std::invalid_argument("synth: script drives box out of positive area");
  return b;
}

bool visible_at(const ActorSpec& a, std::int64_t t) {
  for (const auto& [lo, hi] : a.visible_spans)
    if (t >= lo && t <= hi) return true;
  return false;
}

}  // namespace

std::pair<Scenario, GroundTruth> generate_scenario(const SynthSpec& spec,
                                                   const MotionConfig& motion_cfg) {
  if (spec.frames < 1) throw std::invalid_argument("synth: T must be >= 1");
  for (const auto& a : spec.actors)
    for (const auto& [lo, hi] : a.visible_spans)
      if (lo < 1 || hi > spec.frames || lo > hi)
        throw std::invalid_argument("synth: visible span outside [1,T]");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> jitter(0.0, spec.noise_std);

  Scenario s;
  s.id = spec.id;
  GroundTruth gt;
  gt.actors.resize(spec.actors.size());

  for (std::size_t ai = 0; ai < spec.actors.size(); ++ai) {
    gt.actors[ai].class_name = spec.actors[ai].class_name;
    for (const auto& [lo, hi] : spec.actors[ai].visible_spans) {
      gt.actors[ai].appearance_frames.push_back(lo);
      if (hi < spec.frames) gt.actors[ai].lost_transition_frames.push_back(hi + 1);
    }
  }

  for (std::int64_t t = 1; t <= spec.frames; ++t) {
    FrameRecord f;
    f.frame_index = t;
    for (std::size_t ai = 0; ai < spec.actors.size(); ++ai) {
      const ActorSpec& a = spec.actors[ai];
      if (!visible_at(a, t)) continue;
      const ScriptBox b = box_at(a, t);

      ActorFrameTruth truth;
      truth.frame = t;
      truth.center = b.center;
      truth.area = b.area();
      auto& obs = gt.actors[ai].observations;
      if (!obs.empty()) {
        const auto& prev = obs.back();
        const auto stride = t - prev.frame;
        truth.velocity = motion_vector(b.center, prev.center, stride);
        const double rho = area_change_rate(b.area(), prev.area);
        truth.state = kinematic_state(truth.velocity, rho, b.w, motion_cfg);
      }
      obs.push_back(truth);

      Detection d;
      const double jx = spec.noise_std > 0.0 ? jitter(rng) : 0.0;
      const double jy = spec.noise_std > 0.0 ? jitter(rng) : 0.0;
      d.x1 = b.center.x + jx - b.w / 2.0;
      d.x2 = b.center.x + jx + b.w / 2.0;
      d.y1 = b.center.y + jy - b.h / 2.0;
      d.y2 = b.center.y + jy + b.h / 2.0;
      d.class_name = a.class_name;
      d.score = a.score;
      f.detections.push_back(std::move(d));
    }
    s.frames.push_back(std::move(f));
  }
  return {std::move(s), std::move(gt)};
}

SynthSpec preset(const std::string& name) {
  SynthSpec spec;
  spec.id = name;
  if (name == "intrusion_crossing") {
    // Mirrors the dynamic-intrusion fixture: three persons tracked from the
    // start, one occluded mid-sequence, a fourth crossing leftward.
    spec.frames = 20;
    spec.actors = {
        {"person", 1400, 929, 1480, 1119, {34, 0}, 0.0, 0.9, {{1, 14}}},
        {"person", 600, 400, 660, 580, {0, 0}, 0.0, 0.9, {{1, 20}}},
        {"person", 900, 420, 950, 560, {0, 0}, 0.0, 0.9, {{1, 20}}},
        {"person", 166, 230, 238, 433, {-9, 0}, 0.0, 0.9, {{2, 20}}},
    };
  } else if (name == "occlusion_gap") {
    spec.frames = 12;
    spec.actors = {
        {"person", 100, 100, 150, 220, {5, 0}, 0.0, 0.9, {{1, 5}, {9, 12}}},
    };
  } else if (name == "empty_track") {
    spec.frames = 20;
  } else if (name == "approaching_object") {
    spec.frames = 10;
    spec.actors = {
        {"car", 800, 500, 900, 560, {0, 0}, 0.3, 0.9, {{1, 10}}},
    };
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  return spec;
}

std::vector<std::string> preset_names() {
  return {"intrusion_crossing", "occlusion_gap", "empty_track", "approaching_object"};
}

SynthSpec parse_synth_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid synth spec JSON: ") + e.what());
  }
  SynthSpec s;
  s.id = j.value("id", "synth");
  s.frames = j.at("T").get<std::int64_t>();
  s.width = j.value("width", 1920);
  s.height = j.value("height", 1080);
  s.noise_std = j.value("noise_std", 0.0);
  s.seed = j.value("seed", 0ULL);
  if (j.contains("actors"))
    for (const auto& aj : j.at("actors")) {
      ActorSpec a;
      a.class_name = aj.at("class").get<std::string>();
      const auto& box = aj.at("box");
      a.x1 = box.at(0);
      a.y1 = box.at(1);
      a.x2 = box.at(2);
      a.y2 = box.at(3);
      if (aj.contains("velocity")) {
        a.velocity.x = aj["velocity"].at(0);
        a.velocity.y = aj["velocity"].at(1);
      }
      a.area_growth = aj.value("area_growth", 0.0);
      a.score = aj.value("score", 0.9);
      for (const auto& sp : aj.at("spans"))
        a.visible_spans.emplace_back(sp.at(0).get<std::int64_t>(), sp.at(1).get<std::int64_t>());
      s.actors.push_back(std::move(a));
    }
  return s;
}

std::string serialize_synth_spec(const SynthSpec& s) {
  json j;
  j["id"] = s.id;
  j["T"] = s.frames;
  j["width"] = s.width;
  j["height"] = s.height;
  j["noise_std"] = s.noise_std;
  j["seed"] = s.seed;
  j["actors"] = json::array();
  for (const auto& a : s.actors) {
    json aj;
    aj["class"] = a.class_name;
    aj["box"] = {a.x1, a.y1, a.x2, a.y2};
    aj["velocity"] = {a.velocity.x, a.velocity.y};
    aj["area_growth"] = a.area_growth;
    aj["score"] = a.score;
    aj["spans"] = json::array();
    for (const auto& [lo, hi] : a.visible_spans) aj["spans"].push_back({lo, hi});
    j["actors"].push_back(std::move(aj));
  }
  return j.dump(2);
}

std::string serialize_ground_truth(const GroundTruth& gt) {
  json j;
  j["actors"] = json::array();
  for (const auto& a : gt.actors) {
    json aj;
    aj["class"] = a.class_name;
    aj["appearances"] = a.appearance_frames;
    aj["lost_transitions"] = a.lost_transition_frames;
    aj["observations"] = json::array();
    for (const auto& o : a.observations)
      aj["observations"].push_back({{"frame", o.frame},
                                    {"cx", o.center.x},
                                    {"cy", o.center.y},
                                    {"area", o.area},
                                    {"vx", o.velocity.x},
                                    {"vy", o.velocity.y},
                                    {"state", o.state == KinematicState::Moving ? "Moving"
                                                                                : "Static"}});
    j["actors"].push_back(std::move(aj));
  }
  return j.dump(2);
}

}  // namespace railcom
