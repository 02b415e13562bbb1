#include <doctest.h>

#include <numeric>
#include <random>

#include "railcom/sampler.hpp"
#include "railcom/synth.hpp"

using namespace railcom;

TEST_CASE("event score is the weighted event sum") {
  SamplerConfig cfg;  // weights 2, 1, 1
  CHECK(event_score({1, 2, 1}, cfg) == doctest::Approx(5.0));
  CHECK(event_score({0, 0, 0}, cfg) == 0.0);
  cfg.w_new = 3.0;
  cfg.w_lost = 0.5;
  CHECK(event_score({2, 1, 4}, cfg) == doctest::Approx(9.0));
}

TEST_CASE("budget tiers with boundary semantics") {
  SamplerConfig cfg;  // k_max 8, alpha 0.5, tau_low 10, tau_high 30
  auto k_for = [&](double total) {
    // one frame carrying the whole mass
    return allocate_budget({total}, cfg);
  };
  CHECK(k_for(35.0) == std::pair<double, std::int64_t>{35.0, 8});
  CHECK(k_for(30.0).second == 8);  // S == tau_high takes the top tier
  CHECK(k_for(29.9).second == 4);  // floor(0.5 * 8)
  CHECK(k_for(10.0).second == 4);  // S == tau_low takes the middle tier
  CHECK(k_for(9.9).second == 2);
  CHECK(k_for(0.0).second == 2);
  SUBCASE("middle tier is floored at 3") {
    cfg.alpha = 0.3;  // floor(2.4) = 2 -> clamped to 3
    CHECK(k_for(15.0).second == 3);
  }
  SUBCASE("invalid configs throw") {
    SamplerConfig bad;
    bad.k_max = 2;
    CHECK_THROWS_AS(allocate_budget({1.0}, bad), std::invalid_argument);
    SamplerConfig crossed;
    crossed.tau_low = 40.0;
    CHECK_THROWS_AS(allocate_budget({1.0}, crossed), std::invalid_argument);
    CHECK_THROWS_AS(allocate_budget({}, cfg), std::invalid_argument);
  }
}

TEST_CASE("keyframe selection frozen example") {
  // T=10, K=3: segments over frames 1..9 are 1..4 and 5..9
  const std::vector<double> scores = {0, 5, 1, 0, 2, 0, 9, 0, 1, 0};
  CHECK(select_keyframes(scores, 3) == std::vector<std::int64_t>{2, 7, 10});
}

TEST_CASE("keyframe ties resolve to the earliest frame") {
  const std::vector<double> flat(9, 0.0);
  CHECK(select_keyframes(flat, 3) == std::vector<std::int64_t>{1, 5, 9});
}

TEST_CASE("short sequences return all frames") {
  const std::vector<double> scores = {3, 1, 4};
  CHECK(select_keyframes(scores, 3) == std::vector<std::int64_t>{1, 2, 3});
  CHECK(select_keyframes(scores, 8) == std::vector<std::int64_t>{1, 2, 3});
}

TEST_CASE("keyframe structural invariants hold on random inputs") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> t_dist(2, 200);
  std::uniform_int_distribution<int> k_dist(2, 16);
  std::uniform_real_distribution<double> score(0.0, 20.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int t = t_dist(rng);
    const int k = k_dist(rng);
    std::vector<double> scores(t);
    for (auto& s : scores) s = score(rng);
    auto kf = select_keyframes(scores, k);
    CHECK(kf.size() == static_cast<std::size_t>(std::min(t, k)));
    CHECK(kf.back() == t);
    for (std::size_t i = 1; i < kf.size(); ++i) CHECK(kf[i - 1] < kf[i]);
    CHECK(kf.front() >= 1);
    // deterministic
    CHECK(select_keyframes(scores, k) == kf);
  }
}

TEST_CASE("nearest-rank percentiles") {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(calibrate_thresholds(v) == std::pair<double, double>{25.0, 75.0});
  // order must not matter
  std::mt19937_64 rng(5);
  std::shuffle(v.begin(), v.end(), rng);
  CHECK(calibrate_thresholds(v) == std::pair<double, double>{25.0, 75.0});
  CHECK(calibrate_thresholds({7.0}) == std::pair<double, double>{7.0, 7.0});
  // n=4: ceil(1) = 1st, ceil(3) = 3rd order statistic
  CHECK(calibrate_thresholds({40.0, 10.0, 20.0, 30.0}) == std::pair<double, double>{10.0, 30.0});
  CHECK_THROWS_AS(calibrate_thresholds({}), std::invalid_argument);
}

TEST_CASE("event counting on the crossing fixture") {
  auto [scenario, gt] = generate_scenario(preset("intrusion_crossing"));
  auto mas = annotate_motion(run_tracking(scenario, {}), {});
  auto counts = count_events(mas);
  REQUIRE(counts.size() == 20);
  CHECK(counts[0].new_tracks == 3);   // three actors enter at frame 1
  CHECK(counts[1].new_tracks == 1);   // the crossing person enters at frame 2
  CHECK(counts[14].lost_transitions == 1);  // occlusion starts at frame 15
  // walkers turn Moving from their second observation on
  CHECK(counts[0].moving == 0);
  CHECK(counts[1].moving == 1);   // the frame-1 walker
  CHECK(counts[2].moving == 2);   // both walkers
}

TEST_CASE("plan_sampling glues scoring, budget and selection together") {
  auto [scenario, gt] = generate_scenario(preset("intrusion_crossing"));
  auto mas = annotate_motion(run_tracking(scenario, {}), {});
  SamplerConfig cfg;
  auto plan = plan_sampling(mas, cfg);
  CHECK(plan.scores.size() == 20);
  CHECK(plan.complexity ==
        doctest::Approx(std::accumulate(plan.scores.begin(), plan.scores.end(), 0.0)));
  CHECK(plan.budget == 8);  // busy scene, S well above tau_high
  CHECK(plan.keyframes.size() == 8);
  CHECK(plan.keyframes.back() == 20);
  const std::string j = serialize_plan_json(plan, cfg);
  CHECK(j.find("\"S\"") != std::string::npos);
  CHECK(j.find("\"keyframes\"") != std::string::npos);
  CHECK(j.find("\"tau_high\"") != std::string::npos);
}

TEST_CASE("empty scenes fall to the floor budget") {
  auto [scenario, gt] = generate_scenario(preset("empty_track"));
  auto mas = annotate_motion(run_tracking(scenario, {}), {});
  auto plan = plan_sampling(mas, {});
  CHECK(plan.complexity == 0.0);
  CHECK(plan.budget == 2);
  CHECK(plan.keyframes == std::vector<std::int64_t>{1, 20});
}
