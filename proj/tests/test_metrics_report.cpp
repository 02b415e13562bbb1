#include <doctest.h>

#include "railcom/metrics_report.hpp"

using namespace railcom;

namespace {

RunReport report_for(const std::string& scenario, double stps, double acc, double overall) {
  RunReport r;
  r.scenario_id = scenario;
  r.stps = stps;
  r.cq_accuracy = acc;
  r.scores.overall = overall;
  r.scores.dimension_means["risk_assessment"] = overall - 5.0;
  r.total_tokens = 100;
  r.total_latency_ms = 1000;
  return r;
}

}  // namespace

TEST_CASE("comparison computes last-minus-first deltas per metric") {
  std::vector<LabeledRun> runs = {
      {"baseline", report_for("scn", 30.0, 50.0, 70.0)},
      {"tracked", report_for("scn", 45.0, 62.5, 82.0)},
  };
  auto c = compare_runs(runs);
  CHECK(c.metrics.at("stps") == std::vector<double>{30.0, 45.0});
  CHECK(c.deltas.at("stps") == doctest::Approx(15.0));
  CHECK(c.deltas.at("cq_acc") == doctest::Approx(12.5));
  CHECK(c.deltas.at("overall") == doctest::Approx(12.0));
  CHECK(c.deltas.at("dim.risk_assessment") == doctest::Approx(12.0));
}

TEST_CASE("three-way comparisons keep run order") {
  std::vector<LabeledRun> runs = {
      {"a", report_for("scn", 10.0, 0.0, 50.0)},
      {"b", report_for("scn", 20.0, 0.0, 55.0)},
      {"c", report_for("scn", 35.0, 0.0, 61.0)},
  };
  auto c = compare_runs(runs);
  CHECK(c.metrics.at("stps") == std::vector<double>{10.0, 20.0, 35.0});
  CHECK(c.deltas.at("stps") == doctest::Approx(25.0));
}

TEST_CASE("comparison requires matching scenario sets and enough runs") {
  CHECK_THROWS_AS(compare_runs({{"only", report_for("scn", 1, 1, 1)}}), std::invalid_argument);
  CHECK_THROWS_WITH_AS(compare_runs({{"a", report_for("scn1", 1, 1, 1)},
                                     {"b", report_for("scn2", 1, 1, 1)}}),
                       doctest::Contains("mismatch"), std::invalid_argument);
}

TEST_CASE("rendered table lists every run label and fixed decimals") {
  std::vector<LabeledRun> runs = {
      {"baseline", report_for("scn", 30.0, 50.0, 70.0)},
      {"tracked", report_for("scn", 45.5, 62.5, 82.0)},
  };
  const std::string table = render_comparison_table(compare_runs(runs));
  CHECK(table.find("baseline") != std::string::npos);
  CHECK(table.find("tracked") != std::string::npos);
  CHECK(table.find("45.50") != std::string::npos);
  CHECK(table.find("delta") != std::string::npos);
  CHECK(table.find("stps") != std::string::npos);
}

TEST_CASE("json serialization mirrors the table data") {
  std::vector<LabeledRun> runs = {
      {"a", report_for("scn", 30.0, 50.0, 70.0)},
      {"b", report_for("scn", 45.0, 62.5, 82.0)},
  };
  const std::string j = serialize_comparison_json(compare_runs(runs));
  CHECK(j.find("\"runs\"") != std::string::npos);
  CHECK(j.find("\"deltas\"") != std::string::npos);
  CHECK(j.find("\"stps\"") != std::string::npos);
}
