#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "railcom/llm_gateway.hpp"
#include "railcom/prompting.hpp"

namespace railcom {

inline constexpr std::array<const char*, 12> kJudgeMetrics = {
    "faithfulness_step", "informativeness_step", "risk_assessment", "signal_rule_adherence",
    "object_understanding", "repetition_token", "hallucination", "semantic_coverage",
    "physics_momentum", "missing_step", "relevance", "missing_details"};

struct JudgeScores {
  std::array<int, 12> ratings{};  // 1..10, ordered as kJudgeMetrics

  int& at(const std::string& metric);
  int at(const std::string& metric) const;
};

struct JudgeParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct QaRecord {
  std::string cot_perception, cot_reasoning, cot_planning;
  std::string qa_question, qa_answer;
  std::string mc_question;
  std::map<std::string, std::string> mc_options;
  std::string mc_correct;
};

struct QaValidationError : std::runtime_error {
  std::vector<std::string> violations;
  explicit QaValidationError(std::vector<std::string> v);
};

struct AggregateScores {
  std::map<std::string, double> dimension_means;  // 0-100 scale
  double overall = 0.0;
};

struct EvaluationConfig {
  // Re-orients hallucination / missing_step / missing_details (11 - rating)
  // for judges that emit penalty-oriented scores. Off by default: the
  // shipped rubric is already higher-is-better on all twelve metrics.
  bool invert_penalty_metrics = false;
};

struct QuestionRecord {
  std::string question;
  std::vector<std::int64_t> keyframes;
  std::int64_t budget = 0;      // K; 0 in static mode
  double complexity = 0.0;      // S
  bool defensive = false;
  bool static_mode = false;
  CoTResponse cot;
  std::optional<std::string> choice;
  std::optional<std::string> gold;
  std::int64_t completion_tokens = 0;
  std::int64_t latency_ms = 0;
};

struct RunReport {
  std::string scenario_id;
  std::vector<QuestionRecord> questions;
  std::int64_t total_tokens = 0;
  std::int64_t total_latency_ms = 0;
  double stps = 0.0;
  double cq_accuracy = 0.0;
  AggregateScores scores;  // filled by the judge stage; zero until then

  void finalize_totals();
};

std::string rubric_block();

PromptBundle build_judge_prompt(const CoTResponse& prediction, const std::string& reference,
                                const std::string& scenario_id = "judge",
                                const PromptTemplates& tpl = PromptTemplates::defaults());

// Extracts the first JSON object (tolerating prose and code fences) and
// requires all 12 keys with integer values in [1,10]; never clamps.
JudgeScores parse_judge_scores(const std::string& text);

AggregateScores aggregate_scores(const std::vector<JudgeScores>& per_sample,
                                 const EvaluationConfig& cfg = {});

double cq_accuracy(const std::vector<std::optional<std::string>>& predictions,
                   const std::vector<std::string>& golds);

double system_tps(std::int64_t total_completion_tokens, std::int64_t total_latency_ms);

PromptBundle build_generation_prompt(const std::string& image_ref,
                                     const PromptTemplates& tpl = PromptTemplates::defaults());

QaRecord validate_qa_record(const std::string& text);

std::string serialize_run_report(const RunReport& r);
RunReport parse_run_report(const std::string& json_text);

}  // namespace railcom
