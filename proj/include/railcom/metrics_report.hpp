#pragma once

#include <map>
#include <string>
#include <vector>

#include "railcom/evaluation.hpp"

namespace railcom {

struct LabeledRun {
  std::string label;
  RunReport report;
};

struct RunComparison {
  std::vector<LabeledRun> runs;
  // metric name -> per-run value, in run order; deltas are later - earlier
  // between consecutive runs.
  std::map<std::string, std::vector<double>> metrics;
  std::map<std::string, double> deltas;  // last run minus first run
};

// Requires >= 2 reports over identical scenario sets.
RunComparison compare_runs(const std::vector<LabeledRun>& runs);

std::string render_comparison_table(const RunComparison& c);
std::string serialize_comparison_json(const RunComparison& c);

}  // namespace railcom
