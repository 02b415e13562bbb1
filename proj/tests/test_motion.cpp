#include <doctest.h>

#include <random>

#include "railcom/motion.hpp"
#include "railcom/synth.hpp"

using namespace railcom;

namespace {

TrackedScenario small_tracked(const std::vector<std::vector<Detection>>& frames) {
  Scenario s;
  s.id = "m";
  for (std::size_t i = 0; i < frames.size(); ++i)
    s.frames.push_back({static_cast<std::int64_t>(i + 1), {}, {}, frames[i]});
  return run_tracking(s, {});
}

Detection box(double x1, double y1, double x2, double y2) {
  Detection d;
  d.x1 = x1;
  d.y1 = y1;
  d.x2 = x2;
  d.y2 = y2;
  d.class_name = "person";
  d.score = 0.9;
  return d;
}

}  // namespace

TEST_CASE("motion vector divides displacement by the stride") {
  CHECK(motion_vector({30, 15}, {10, 5}, 2) == Vec2{10, 5});
  CHECK(motion_vector({10, 5}, {10, 5}, 1) == Vec2{0, 0});
  CHECK(motion_vector({0, 0}, {6, 9}, 3) == Vec2{-2, -3});
  CHECK(Vec2{3, 4}.norm() == doctest::Approx(5.0));
}

TEST_CASE("area change rate is relative to the previous area") {
  CHECK(area_change_rate(120.0, 100.0) == doctest::Approx(0.2));
  CHECK(area_change_rate(80.0, 100.0) == doctest::Approx(-0.2));
  CHECK(area_change_rate(100.0, 100.0) == 0.0);
}

TEST_CASE("dynamic threshold scales with width above a floor") {
  MotionConfig cfg;  // tau_min 2.0, lambda 0.1
  CHECK(dynamic_threshold(72.0, cfg) == doctest::Approx(7.2));
  CHECK(dynamic_threshold(10.0, cfg) == doctest::Approx(2.0));   // floored
  CHECK(dynamic_threshold(20.0, cfg) == doctest::Approx(2.0));   // boundary: 0.1*20 == tau_min
  CHECK(dynamic_threshold(20.1, cfg) == doctest::Approx(2.01));
}

TEST_CASE("kinematic state fires on speed or area rate") {
  MotionConfig cfg;  // gamma 0.15
  const double w = 50.0;  // tau_dyn 5.0
  CHECK(kinematic_state({5.0, 0.0}, 0.0, w, cfg) == KinematicState::Moving);  // speed == tau_dyn
  CHECK(kinematic_state({4.9, 0.0}, 0.0, w, cfg) == KinematicState::Static);
  CHECK(kinematic_state({0.0, 0.0}, 0.16, w, cfg) == KinematicState::Moving);
  CHECK(kinematic_state({0.0, 0.0}, -0.16, w, cfg) == KinematicState::Moving);
  CHECK(kinematic_state({0.0, 0.0}, 0.15, w, cfg) == KinematicState::Static);  // strict >
  CHECK(kinematic_state({3.0, 4.0}, 0.0, w, cfg) == KinematicState::Moving);   // norm 5
}

TEST_CASE("first observation of every track is Static with zero velocity") {
  auto ts = small_tracked({{box(0, 0, 100, 100)}, {box(30, 0, 130, 100)}});
  auto mas = annotate_motion(ts, {});
  REQUIRE(mas.samples.size() == 1);
  REQUIRE(mas.samples[0].size() == 2);
  CHECK(mas.samples[0][0].velocity == Vec2{0, 0});
  CHECK(mas.samples[0][0].area_rate == 0.0);
  CHECK(mas.samples[0][0].state == KinematicState::Static);
  CHECK(mas.samples[0][1].velocity == Vec2{30, 0});
  CHECK(mas.samples[0][1].state == KinematicState::Moving);
  CHECK(mas.samples[0][1].tau_dyn == doctest::Approx(10.0));
}

TEST_CASE("velocity uses the observation gap as the stride") {
  // visible at frames 1 and 4 only: 30 px over 3 frames -> 10 px/frame
  auto ts = small_tracked({{box(0, 0, 50, 100)}, {}, {}, {box(30, 0, 80, 100)}});
  auto mas = annotate_motion(ts, {});
  REQUIRE(mas.samples[0].size() == 2);
  CHECK(mas.samples[0][1].velocity == Vec2{10, 0});
  CHECK(mas.samples[0][1].frame_index == 4);
}

TEST_CASE("area-only growth reads as Moving") {
  auto spec = preset("approaching_object");
  auto [scenario, gt] = generate_scenario(spec);
  auto mas = annotate_motion(run_tracking(scenario, {}), {});
  REQUIRE(mas.samples.size() == 1);
  for (std::size_t i = 1; i < mas.samples[0].size(); ++i) {
    CHECK(mas.samples[0][i].state == KinematicState::Moving);
    CHECK(mas.samples[0][i].area_rate == doctest::Approx(0.3));
    CHECK(mas.samples[0][i].velocity.norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("parallel and serial annotation agree exactly") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> pos(0.0, 1000.0);
  for (int trial = 0; trial < 10; ++trial) {
    SynthSpec spec;
    spec.id = "par";
    spec.frames = 40;
    spec.seed = trial;
    spec.noise_std = 1.5;
    for (int i = 0; i < 20; ++i) {
      ActorSpec a;
      a.class_name = i % 2 ? "person" : "car";
      a.x1 = pos(rng);
      a.y1 = pos(rng);
      a.x2 = a.x1 + 30 + pos(rng) / 20;
      a.y2 = a.y1 + 60 + pos(rng) / 20;
      a.velocity = {pos(rng) / 100 - 5, pos(rng) / 200 - 2.5};
      a.visible_spans = {{1, 40}};
      spec.actors.push_back(a);
    }
    auto [scenario, gt] = generate_scenario(spec);
    auto ts = run_tracking(scenario, {});
    auto par = annotate_motion(ts, {});
    auto ser = annotate_motion_serial(ts, {});
    REQUIRE(par.samples.size() == ser.samples.size());
    for (std::size_t ti = 0; ti < par.samples.size(); ++ti)
      CHECK(par.samples[ti] == ser.samples[ti]);
  }
}

TEST_CASE("sample_at resolves by track id and frame") {
  auto ts = small_tracked({{box(0, 0, 50, 100)}, {box(5, 0, 55, 100)}});
  auto mas = annotate_motion(ts, {});
  REQUIRE(mas.sample_at(1, 2) != nullptr);
  CHECK(mas.sample_at(1, 2)->velocity == Vec2{5, 0});
  CHECK(mas.sample_at(1, 3) == nullptr);
  CHECK(mas.sample_at(9, 1) == nullptr);
}

TEST_CASE("annotated jsonl carries the extension fields") {
  auto ts = small_tracked({{box(0, 0, 100, 100)}, {box(30, 0, 130, 100)}});
  auto mas = annotate_motion(ts, {});
  const std::string j = serialize_annotated_jsonl(mas);
  CHECK(j.find("\"vx\"") != std::string::npos);
  CHECK(j.find("\"rho\"") != std::string::npos);
  CHECK(j.find("\"state\"") != std::string::npos);
  CHECK(j.find("Moving") != std::string::npos);
}
