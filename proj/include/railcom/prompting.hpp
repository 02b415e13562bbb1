#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "railcom/memlog.hpp"
#include "railcom/sampler.hpp"

namespace railcom {

// Editable prompt template set. Defaults carry the shipped text blocks; a
// directory of .txt files can override any of them.
struct PromptTemplates {
  std::string dynamic_system;
  std::string static_system;
  std::string defensive_block;
  std::string user_log;       // {log} placeholder
  std::string user_question;  // {question} placeholder
  std::string generation_system;
  std::string generation_user;
  std::string judge_system;

  static const PromptTemplates& defaults();
  static PromptTemplates load_dir(const std::string& dir);
};

enum class PartRole { image, log, question, annotation, defensive, text };

struct PromptPart {
  PartRole role = PartRole::text;
  std::string text;       // text content, or image path/URI for image parts
  std::string seq_label;  // "Seq: t/T" for image parts
  friend bool operator==(const PromptPart&, const PromptPart&) = default;
};

enum class PromptMode { dynamic_mode, static_mode };

struct PromptBundle {
  std::string scenario_id;
  std::string system_text;
  std::vector<PromptPart> user_parts;
  bool defensive = false;
  std::string question_text;
  PromptMode mode = PromptMode::dynamic_mode;
  friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

struct CoTResponse {
  std::string perceiving;
  std::string reasoning;
  std::string planning;
  std::string final_answer;
  std::optional<std::string> choice_letter;
};

struct CotParseError : std::runtime_error {
  std::vector<std::string> missing_sections;
  std::string raw_text;
  CotParseError(std::vector<std::string> missing, std::string raw);
};

// True iff strictly more than 80% of the expanded per-frame entries are
// "No objects.". Coalesced ranges count as their expanded frame count.
bool defensive_trigger(const std::vector<LogEntry>& entries);

// Keyframe images labeled "Seq: t/T", then the rendered log, then the
// question. keyframe_images maps 1-based frame position to an image ref;
// missing refs degrade to text placeholders naming the frame. The defensive
// block is appended when defensive_trigger fires on the entries.
PromptBundle compose_dynamic_prompt(const SamplingPlan& plan, std::int64_t total_frames,
                                    const std::vector<LogEntry>& entries,
                                    const std::string& question,
                                    const std::map<std::int64_t, std::string>& keyframe_images,
                                    const std::string& scenario_id,
                                    const PromptTemplates& tpl = PromptTemplates::defaults());

PromptBundle compose_static_prompt(const FrameRecord& frame, const std::string& question,
                                   const std::string& scenario_id,
                                   const PromptTemplates& tpl = PromptTemplates::defaults());

// Appends the defensive block immediately after the log part (or at the end
// when the bundle has none). Precondition: not already defensive.
PromptBundle inject_defensive_block(const PromptBundle& b,
                                    const PromptTemplates& tpl = PromptTemplates::defaults());

// Splits on the Perceiving/Perception, Reasoning, Planning, Final Answer
// headers, case-insensitive and tolerant of markdown emphasis. All four
// sections must be present and non-empty.
CoTResponse parse_cot_response(const std::string& text);

// First standalone option-letter in the final answer (fallback: whole
// text). Absent or ambiguous matches yield nullopt.
std::optional<std::string> extract_choice(const std::string& text);
std::optional<std::string> extract_choice(const CoTResponse& r);

std::string substitute_placeholder(std::string tpl, const std::string& key,
                                   const std::string& value);

}  // namespace railcom
