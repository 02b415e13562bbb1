#include <doctest.h>

#include "railcom/memlog.hpp"
#include "railcom/synth.hpp"

using namespace railcom;

namespace {

MotionAnnotatedScenario annotated(const std::string& preset_name) {
  auto [scenario, gt] = generate_scenario(preset(preset_name));
  return annotate_motion(run_tracking(scenario, {}), {});
}

}  // namespace

TEST_CASE("direction labels quantize velocity and depth motion") {
  CHECK(direction_label({0, 0}, 0.0, KinematicState::Static, 2.0) == "stationary");
  CHECK(direction_label({-9, 0}, 0.0, KinematicState::Moving, 7.2) == "moving left");
  CHECK(direction_label({9, 1}, 0.0, KinematicState::Moving, 7.2) == "moving right");
  CHECK(direction_label({1, -5}, 0.0, KinematicState::Moving, 2.0) == "moving up");
  CHECK(direction_label({1, 5}, 0.0, KinematicState::Moving, 2.0) == "moving down");
  // equal axes prefer horizontal
  CHECK(direction_label({4, 4}, 0.0, KinematicState::Moving, 2.0) == "moving right");
  // Moving on the area clause alone
  CHECK(direction_label({0.5, 0}, 0.3, KinematicState::Moving, 2.0) == "approaching");
  CHECK(direction_label({0.5, 0}, -0.3, KinematicState::Moving, 2.0) == "receding");
}

TEST_CASE("lost position extrapolates the last velocity") {
  Track t;
  t.track_id = 1;
  t.class_name = "person";
  Detection a;
  a.x1 = 1366;
  a.y1 = 929;
  a.x2 = 1446;
  a.y2 = 1119;
  Detection b = a;
  b.x1 += 34;
  b.x2 += 34;
  t.history.emplace_back(13, a);
  t.history.emplace_back(14, b);
  // center at 14 is (1440, 1024); one frame on at v=(34,0)
  const Point p = predict_lost_position(t, 15);
  CHECK(p.x == doctest::Approx(1474.0));
  CHECK(p.y == doctest::Approx(1024.0));
  SUBCASE("single observation predicts in place") {
    Track single;
    single.history.emplace_back(3, a);
    const Point q = predict_lost_position(single, 7);
    CHECK(q.x == doctest::Approx(1406.0));
    CHECK(q.y == doctest::Approx(1024.0));
  }
  SUBCASE("no observation at or before the frame is an error") {
    CHECK_THROWS_AS(predict_lost_position(t, 12), std::invalid_argument);
  }
}

TEST_CASE("single-frame line grammar") {
  LogEntry e;
  e.start = e.end = 15;
  e.visible.push_back({"person", 4, 40, 230, 112, 433, "moving left"});
  e.lost.push_back({"person", 1, 1916, 1024});
  CHECK(render_log_line(e) ==
        "Frame 15: person (ID:4) at [40,230,112,433] Motion: moving left | "
        "person (ID:1) [Occluded/Lost] predicted at approx [1916, 1024]");
}

TEST_CASE("range and empty lines") {
  LogEntry range;
  range.start = 3;
  range.end = 6;
  range.visible.push_back({"car", 2, 0, 0, 10, 10, "stationary"});
  CHECK(render_log_line(range) == "Frame 3 to Frame 6: car (ID:2) at [0,0,10,10] Motion: stationary");
  LogEntry empty;
  empty.start = empty.end = 1;
  CHECK(render_log_line(empty) == "Frame 1: No objects.");
}

TEST_CASE("visible items precede lost items, each ascending by id") {
  auto parsed = parse_log_line(
      "Frame 1: a (ID:2) at [0,0,1,1] Motion: stationary | b (ID:7) at [0,0,1,1] Motion: "
      "stationary | c (ID:3) [Occluded/Lost] predicted at approx [20, 20] | c (ID:5) "
      "[Occluded/Lost] predicted at approx [10, 10]");
  CHECK(parsed.visible[0].track_id == 2);
  CHECK(parsed.visible[1].track_id == 7);
  CHECK(parsed.lost[0].track_id == 3);
}

TEST_CASE("parse_log_line round-trips and rejects deviations") {
  for (const std::string line :
       {std::string("Frame 1: No objects."),
        std::string("Frame 2: person (ID:1) at [5,6,7,8] Motion: moving right"),
        std::string("Frame 4 to Frame 9: No objects."),
        std::string("Frame 15: person (ID:1) [Occluded/Lost] predicted at approx [1916, 1024]")}) {
    CHECK(render_log_line(parse_log_line(line)) == line);
  }
  CHECK_THROWS_AS(parse_log_line("Frame x: No objects."), ParseError);
  CHECK_THROWS_AS(parse_log_line("Frame 1: person ID:1 at [1,2,3,4] Motion: up"), ParseError);
  // lost item without the space after the comma
  CHECK_THROWS_AS(
      parse_log_line("Frame 1: person (ID:1) [Occluded/Lost] predicted at approx [5,6]"),
      ParseError);
  // visible item with the space
  CHECK_THROWS_AS(parse_log_line("Frame 1: person (ID:1) at [1, 2, 3, 4] Motion: stationary"),
                  ParseError);
  CHECK_THROWS_AS(parse_log_line("Frame 9 to Frame 3: No objects."), ParseError);
}

TEST_CASE("empty scenario renders one coalesced empty range") {
  auto mas = annotated("empty_track");
  auto entries = build_log_entries(mas, true);
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].start == 1);
  CHECK(entries[0].end == 20);
  CHECK(entries[0].empty());
  CHECK(render_log_line(entries[0]) == "Frame 1 to Frame 20: No objects.");
  auto expanded = expand_log_entries(entries);
  REQUIRE(expanded.size() == 20);
  CHECK(expanded[4].start == 5);
  CHECK(expanded[4].end == 5);
}

TEST_CASE("coalescing merges only identical adjacent renderings") {
  SynthSpec spec;
  spec.id = "static_pair";
  spec.frames = 12;
  spec.actors = {
      {"person", 100, 100, 150, 220, {0, 0}, 0.0, 0.9, {{1, 12}}},
      {"car", 400, 500, 520, 580, {0, 0}, 0.0, 0.9, {{1, 12}}},
  };
  auto [scenario, gt] = generate_scenario(spec);
  auto mas = annotate_motion(run_tracking(scenario, {}), {});
  auto coalesced = build_log_entries(mas, true);
  auto plain = build_log_entries(mas, false);
  REQUIRE(plain.size() == 12);
  REQUIRE(coalesced.size() == 1);
  CHECK(coalesced[0].start == 1);
  CHECK(coalesced[0].end == 12);
  CHECK(coalesced[0].visible.size() == 2);
  // expansion of the coalesced log renders identically to the plain log
  auto expanded = expand_log_entries(coalesced);
  REQUIRE(expanded.size() == 12);
  for (std::size_t i = 0; i < plain.size(); ++i)
    CHECK(render_log_line(expanded[i]) == render_log_line(plain[i]));

  // the moving fixture never merges: every frame renders differently
  auto moving = annotated("occlusion_gap");
  CHECK(build_log_entries(moving, true).size() == build_log_entries(moving, false).size());
}

TEST_CASE("occlusion renders lost predictions then recovery") {
  auto mas = annotated("occlusion_gap");
  auto entries = build_log_entries(mas, false);
  // frames 6..8 show the lost track extrapolated at 5 px/frame from frame 5
  const LogEntry& f6 = entries[5];
  REQUIRE(f6.lost.size() == 1);
  CHECK(f6.visible.empty());
  CHECK(f6.lost[0].track_id == 1);
  // center at frame 5: (125+20, 160) = (145,160); +5 px
  CHECK(f6.lost[0].cx == 150);
  CHECK(f6.lost[0].cy == 160);
  const LogEntry& f9 = entries[8];
  REQUIRE(f9.visible.size() == 1);
  CHECK(f9.visible[0].track_id == 1);
  CHECK(f9.lost.empty());
}

TEST_CASE("full event log parses back to the same entries") {
  for (const char* name : {"intrusion_crossing", "occlusion_gap", "approaching_object"}) {
    auto mas = annotated(name);
    for (bool coalesce : {false, true}) {
      const std::string text = render_event_log(mas, coalesce);
      auto entries = build_log_entries(mas, coalesce);
      auto parsed = parse_event_log(text);
      REQUIRE(parsed.size() == entries.size());
      for (std::size_t i = 0; i < entries.size(); ++i) CHECK(parsed[i] == entries[i]);
    }
  }
}
