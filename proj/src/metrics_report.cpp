#include "railcom/metrics_report.hpp"

#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace railcom {

RunComparison compare_runs(const std::vector<LabeledRun>& runs) {
  if (runs.size() < 2) throw std::invalid_argument("compare_runs: need at least 2 runs");
  const std::string& base_id = runs.front().report.scenario_id;
  for (const auto& r : runs)
    if (r.report.scenario_id != base_id)
      throw std::invalid_argument("compare_runs: scenario-set mismatch: {" + base_id +
                                  "} vs {" + r.report.scenario_id + "}");

  RunComparison c;
  c.runs = runs;
  auto put = [&](const std::string& name, auto getter) {
    for (const auto& r : runs) c.metrics[name].push_back(getter(r.report));
    c.deltas[name] = c.metrics[name].back() - c.metrics[name].front();
  };
  put("stps", [](const RunReport& r) { return r.stps; });
  put("cq_acc", [](const RunReport& r) { return r.cq_accuracy; });
  put("overall", [](const RunReport& r) { return r.scores.overall; });
  put("tokens", [](const RunReport& r) { return static_cast<double>(r.total_tokens); });
  put("latency_ms", [](const RunReport& r) { return static_cast<double>(r.total_latency_ms); });
  std::set<std::string> dims;
  for (const auto& r : runs)
    for (const auto& [k, _] : r.report.scores.dimension_means) dims.insert(k);
  for (const auto& d : dims)
    put("dim." + d, [&](const RunReport& r) {
      auto it = r.scores.dimension_means.find(d);
      return it == r.scores.dimension_means.end() ? 0.0 : it->second;
    });
  return c;
}

std::string render_comparison_table(const RunComparison& c) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << std::left << std::setw(22) << "metric";
  for (const auto& r : c.runs) out << std::right << std::setw(14) << r.label;
  out << std::right << std::setw(14) << "delta" << '\n';
  for (const auto& [name, values] : c.metrics) {
    out << std::left << std::setw(22) << name;
    for (double v : values) out << std::right << std::setw(14) << v;
    out << std::right << std::setw(14) << c.deltas.at(name) << '\n';
  }
  return out.str();
}

std::string serialize_comparison_json(const RunComparison& c) {
  nlohmann::json j;
  j["runs"] = nlohmann::json::array();
  for (const auto& r : c.runs) j["runs"].push_back(r.label);
  j["metrics"] = nlohmann::json::object();
  for (const auto& [name, values] : c.metrics) j["metrics"][name] = values;
  j["deltas"] = nlohmann::json::object();
  for (const auto& [name, d] : c.deltas) j["deltas"][name] = d;
  return j.dump(2);
}

}  // namespace railcom
