#include "railcom/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace railcom {

using nlohmann::json;

int& JudgeScores::at(const std::string& metric) {
  for (std::size_t i = 0; i < kJudgeMetrics.size(); ++i)
    if (metric == kJudgeMetrics[i]) return ratings[i];
  throw std::out_of_range("unknown judge metric '" + metric + "'");
}

int JudgeScores::at(const std::string& metric) const {
  return const_cast<JudgeScores*>(this)->at(metric);
}

QaValidationError::QaValidationError(std::vector<std::string> v)
    : std::runtime_error([&] {
        std::string msg = "QA record invalid:";
        for (const auto& s : v) msg += " [" + s + "]";
        return msg;
      }()),
      violations(std::move(v)) {}

std::string rubric_block() {
  // One row per metric: key, evaluation focus, excellent/poor anchors.
  static const char* kRows[12][3] = {
      {"faithfulness_step",
       "Alignment with Ground Truth and Standard Operating Procedures (SOPs).",
       "Excellent: All steps correctly match reference SOPs. Poor: Majority of steps contradict "
       "ground truth."},
      {"informativeness_step",
       "Completeness of reasoning regarding train status and environment.",
       "Excellent: Captures all critical info (Signals, Switches). Poor: Poor extraction of "
       "relevant reasoning."},
      {"risk_assessment",
       "Prioritization of high-risk hazards (distinguishing safe surroundings vs. intrusions).",
       "Excellent: Prioritizes Emergency Braking for intrusions. Poor: Misses obvious "
       "obstructions or critical signals."},
      {"signal_rule_adherence",
       "Compliance with Railway General Operating Rules and Signal Systems.",
       "Excellent: Fully compliant with signal aspects. Poor: Promotes highly unsafe behavior "
       "(e.g., SPAD)."},
      {"object_understanding",
       "Interpretation of railway assets and spatial location of dynamic objects.",
       "Excellent: Correctly distinguishes safe objects from intruders. Poor: Misidentifies or "
       "ignores key objects."},
      {"repetition_token",
       "Identification of unnecessary redundancy in the generated reasoning.",
       "Excellent: No redundancy, concise technical description. Poor: Excessive redundancy, "
       "making reasoning unclear."},
      {"hallucination",
       "Detection of irrelevant or invented reasoning steps not aligned with visual facts.",
       "Excellent: No hallucinations; grounded in the rail domain. Poor: Majority of reasoning "
       "is hallucinated."},
      {"semantic_coverage",
       "Extent to which the response covers critical elements defined in the Ground Truth.",
       "Excellent: Nearly complete semantic coverage. Poor: Very poor semantic coverage with "
       "major gaps."},
      {"physics_momentum",
       "Understanding of train kinematics, 1-degree of freedom, and braking inertia.",
       "Excellent: Acknowledges long braking distances and horn use. Poor: Suggests 'Steering' "
       "or 'Swerving' to avoid obstacles."},
      {"missing_step",
       "Evaluation of whether any necessary logical reasoning steps are omitted.",
       "Excellent: No critical steps missing. Poor: Response is highly incomplete with critical "
       "gaps."},
      {"relevance",
       "Specificity to the scenario and correct use of railway terminology.",
       "Excellent: Highly specific (e.g., uses 'Ballast', 'Pantograph'). Poor: Largely "
       "irrelevant or uses generic driving terms."},
      {"missing_details",
       "The extent to which critical contextual information is absent.",
       "Excellent: No significant details are missing. Poor: Response is highly lacking in "
       "necessary details."},
  };
  std::ostringstream out;
  out << "Scoring rubric (score range: 1-10; Excellent = 9-10, Poor = 1-2):\n";
  for (const auto& row : kRows)
    out << "- " << row[0] << ": " << row[1] << ' ' << row[2] << '\n';
  return out.str();
}

PromptBundle build_judge_prompt(const CoTResponse& prediction, const std::string& reference,
                                const std::string& scenario_id, const PromptTemplates& tpl) {
  if (reference.empty()) throw std::invalid_argument("build_judge_prompt: empty reference");
  PromptBundle b;
  b.scenario_id = scenario_id;
  b.mode = PromptMode::static_mode;
  b.system_text = tpl.judge_system + "\n" + rubric_block();
  std::ostringstream user;
  user << "Reference:\n" << reference << "\n\n";
  user << "Prediction (structured CoT):\n";
  user << "Perceiving: " << prediction.perceiving << '\n';
  user << "Reasoning: " << prediction.reasoning << '\n';
  user << "Planning: " << prediction.planning << '\n';
  user << "Final Answer: " << prediction.final_answer << "\n\n";
  user << "Output a flat JSON object with exactly these keys, each an integer from 1 to 10:\n{";
  for (std::size_t i = 0; i < kJudgeMetrics.size(); ++i)
    user << (i ? ", " : "") << '"' << kJudgeMetrics[i] << "\": <1-10>";
  user << "}";
  b.user_parts.push_back({PartRole::text, user.str(), ""});
  return b;
}

namespace {

// First balanced JSON object in the text, string-literal aware.
std::string first_json_object(const std::string& text) {
  const std::size_t start = text.find('{');
  if (start == std::string::npos) throw JudgeParseError("no JSON object found");
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\')
        ++i;
      else if (c == '"')
        in_string = false;
    } else if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return text.substr(start, i - start + 1);
    }
  }
  throw JudgeParseError("unterminated JSON object");
}

std::string strip_code_fences(const std::string& text) {
  std::string out;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.rfind("```", 0) == 0) continue;
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace

JudgeScores parse_judge_scores(const std::string& text) {
  json j;
  try {
    j = json::parse(first_json_object(strip_code_fences(text)));
  } catch (const json::exception& e) {
    throw JudgeParseError(std::string("invalid judge JSON: ") + e.what());
  }
  JudgeScores s;
  for (std::size_t i = 0; i < kJudgeMetrics.size(); ++i) {
    const char* key = kJudgeMetrics[i];
    if (!j.contains(key)) throw JudgeParseError(std::string("missing key ") + key);
    const auto& v = j.at(key);
    if (!v.is_number_integer())
      throw JudgeParseError(std::string("non-integer rating for ") + key);
    const auto r = v.get<std::int64_t>();
    if (r < 1 || r > 10)
      throw JudgeParseError(std::string("rating for ") + key + " outside [1,10]: " +
                            std::to_string(r));
    s.ratings[i] = static_cast<int>(r);
  }
  return s;
}

AggregateScores aggregate_scores(const std::vector<JudgeScores>& per_sample,
                                 const EvaluationConfig& cfg) {
  if (per_sample.empty()) throw std::invalid_argument("aggregate_scores: empty sample list");
  AggregateScores out;
  double overall = 0.0;
  for (std::size_t i = 0; i < kJudgeMetrics.size(); ++i) {
    const std::string key = kJudgeMetrics[i];
    const bool invert = cfg.invert_penalty_metrics &&
                        (key == "hallucination" || key == "missing_step" ||
                         key == "missing_details");
    double sum = 0.0;
    for (const auto& s : per_sample) {
      const int r = s.ratings[i];
      sum += invert ? 11 - r : r;
    }
    const double mean = sum / static_cast<double>(per_sample.size()) * 10.0;
    out.dimension_means[key] = mean;
    overall += mean;
  }
  out.overall = overall / static_cast<double>(kJudgeMetrics.size());
  return out;
}

double cq_accuracy(const std::vector<std::optional<std::string>>& predictions,
                   const std::vector<std::string>& golds) {
  if (predictions.size() != golds.size())
    throw std::invalid_argument("cq_accuracy: length mismatch");
  if (predictions.empty()) return 0.0;
  std::int64_t hits = 0;
  for (std::size_t i = 0; i < golds.size(); ++i)
    if (predictions[i] && *predictions[i] == golds[i]) ++hits;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(golds.size());
}

double system_tps(std::int64_t total_completion_tokens, std::int64_t total_latency_ms) {
  if (total_latency_ms <= 0) throw std::invalid_argument("system_tps: non-positive latency");
  return static_cast<double>(total_completion_tokens) /
         (static_cast<double>(total_latency_ms) / 1000.0);
}

PromptBundle build_generation_prompt(const std::string& image_ref, const PromptTemplates& tpl) {
  if (image_ref.empty()) throw std::invalid_argument("build_generation_prompt: empty image ref");
  PromptBundle b;
  b.scenario_id = image_ref;
  b.mode = PromptMode::static_mode;
  b.system_text = tpl.generation_system;
  b.user_parts.push_back({PartRole::image, image_ref, ""});
  b.user_parts.push_back({PartRole::text, tpl.generation_user, ""});
  return b;
}

QaRecord validate_qa_record(const std::string& text) {
  std::vector<std::string> violations;
  json j;
  try {
    j = json::parse(strip_code_fences(text));
  } catch (const json::exception& e) {
    throw QaValidationError({std::string("invalid JSON: ") + e.what()});
  }
  QaRecord r;
  auto text_field = [&](const char* name, std::string& slot) {
    if (!j.contains(name) || !j.at(name).is_string()) {
      violations.push_back(std::string("missing field ") + name);
      return;
    }
    slot = j.at(name).get<std::string>();
    if (slot.empty()) violations.push_back(std::string("empty field ") + name);
  };
  text_field("cot_perception", r.cot_perception);
  text_field("cot_reasoning", r.cot_reasoning);
  text_field("cot_planning", r.cot_planning);
  text_field("qa_question", r.qa_question);
  text_field("qa_answer", r.qa_answer);
  text_field("mc_question", r.mc_question);
  if (!j.contains("mc_options") || !j.at("mc_options").is_object()) {
    violations.push_back("missing field mc_options");
  } else {
    for (const auto& [k, v] : j.at("mc_options").items())
      r.mc_options[k] = v.is_string() ? v.get<std::string>() : v.dump();
    if (r.mc_options.size() < 2) violations.push_back("fewer than 2 options");
  }
  text_field("mc_correct", r.mc_correct);
  if (!r.mc_correct.empty() && !r.mc_options.empty() && !r.mc_options.count(r.mc_correct))
    violations.push_back("mc_correct not in mc_options");
  if (!violations.empty()) throw QaValidationError(std::move(violations));
  return r;
}

void RunReport::finalize_totals() {
  total_tokens = 0;
  total_latency_ms = 0;
  std::vector<std::optional<std::string>> preds;
  std::vector<std::string> golds;
  for (const auto& q : questions) {
    total_tokens += q.completion_tokens;
    total_latency_ms += q.latency_ms;
    if (q.gold) {
      preds.push_back(q.choice);
      golds.push_back(*q.gold);
    }
  }
  stps = total_latency_ms > 0 ? system_tps(total_tokens, total_latency_ms) : 0.0;
  cq_accuracy = golds.empty() ? 0.0 : railcom::cq_accuracy(preds, golds);
}

std::string serialize_run_report(const RunReport& r) {
  json j;
  j["scenario"] = r.scenario_id;
  j["questions"] = json::array();
  for (const auto& q : r.questions) {
    json qj;
    qj["q"] = q.question;
    qj["keyframes"] = q.keyframes;
    qj["K"] = q.budget;
    qj["S"] = q.complexity;
    qj["defensive"] = q.defensive;
    qj["static"] = q.static_mode;
    qj["cot"] = {{"perceiving", q.cot.perceiving},
                 {"reasoning", q.cot.reasoning},
                 {"planning", q.cot.planning},
                 {"final", q.cot.final_answer}};
    if (q.choice) qj["choice"] = *q.choice;
    if (q.gold) qj["gold"] = *q.gold;
    qj["tokens"] = q.completion_tokens;
    qj["latency_ms"] = q.latency_ms;
    j["questions"].push_back(std::move(qj));
  }
  json totals;
  totals["tokens"] = r.total_tokens;
  totals["latency_ms"] = r.total_latency_ms;
  totals["stps"] = r.stps;
  totals["cq_acc"] = r.cq_accuracy;
  totals["overall"] = r.scores.overall;
  totals["dims"] = json::object();
  for (const auto& [k, v] : r.scores.dimension_means) totals["dims"][k] = v;
  j["totals"] = std::move(totals);
  return j.dump(2);
}

RunReport parse_run_report(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid run report JSON: ") + e.what());
  }
  RunReport r;
  r.scenario_id = j.at("scenario").get<std::string>();
  for (const auto& qj : j.at("questions")) {
    QuestionRecord q;
    q.question = qj.at("q").get<std::string>();
    q.keyframes = qj.value("keyframes", std::vector<std::int64_t>{});
    q.budget = qj.value("K", 0);
    q.complexity = qj.value("S", 0.0);
    q.defensive = qj.value("defensive", false);
    q.static_mode = qj.value("static", false);
    if (qj.contains("cot")) {
      q.cot.perceiving = qj["cot"].value("perceiving", "");
      q.cot.reasoning = qj["cot"].value("reasoning", "");
      q.cot.planning = qj["cot"].value("planning", "");
      q.cot.final_answer = qj["cot"].value("final", "");
    }
    if (qj.contains("choice")) q.choice = qj.at("choice").get<std::string>();
    if (qj.contains("gold")) q.gold = qj.at("gold").get<std::string>();
    q.completion_tokens = qj.value("tokens", 0);
    q.latency_ms = qj.value("latency_ms", 0);
    r.questions.push_back(std::move(q));
  }
  const auto& totals = j.at("totals");
  r.total_tokens = totals.value("tokens", 0);
  r.total_latency_ms = totals.value("latency_ms", 0);
  r.stps = totals.value("stps", 0.0);
  r.cq_accuracy = totals.value("cq_acc", 0.0);
  r.scores.overall = totals.value("overall", 0.0);
  if (totals.contains("dims"))
    for (const auto& [k, v] : totals.at("dims").items())
      r.scores.dimension_means[k] = v.get<double>();
  return r;
}

}  // namespace railcom
