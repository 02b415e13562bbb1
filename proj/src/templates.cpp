#include <filesystem>
#include <fstream>
#include <sstream>

#include "railcom/prompting.hpp"

namespace railcom {

namespace {

constexpr const char* kDynamicSystem =
    "You are a railway safety analysis system. Analyze visual inputs (images) and object "
    "tracking logs to provide a professional safety assessment.\n"
    "Each image has a visual timestamp (e.g., 'Seq: 5/20') in the top-left corner.\n"
    "\n"
    "Input Data Instructions:\n"
    "1. Images (PRIMARY SOURCE): The raw visual truth. Trust the images at first.\n"
    "2. Perception Log (SECONDARY SOURCE): Generated by a weak detector, may contain errors or "
    "omissions. Use it as a reference but verify against images.\n"
    "3. Coordinate: Coordinate Origin (0,0) is Top-Left. +X=Right, +Y=Down, corresponds to "
    "instantaneous motion of objects in logs.\n"
    "\n"
    "Response Format (CoT):\n"
    "1. Perception -> Reasoning -> Planning -> Final Answer\n"
    "2. Final Answer: Directly answer the user's question. If it is a multiple-choice question, "
    "explicitly state the correct option.\n"
    "Your answer must be especially concise, professional, and focused on safety implications.\n";

constexpr const char* kStaticSystem =
    "You are a railway safety analysis system. Analyze the provided cab-view image together "
    "with the detector annotations to provide a professional safety assessment.\n"
    "\n"
    "Input Data Instructions:\n"
    "1. Image (PRIMARY SOURCE): The raw visual truth. Trust the image at first.\n"
    "2. Detector Annotations (SECONDARY SOURCE): Generated by a weak detector, may contain "
    "errors or omissions. Use them as a reference but verify against the image.\n"
    "3. Coordinate: Coordinate Origin (0,0) is Top-Left. +X=Right, +Y=Down.\n"
    "\n"
    "Response Format (CoT):\n"
    "1. Perception -> Reasoning -> Planning -> Final Answer\n"
    "2. Final Answer: Directly answer the user's question. If it is a multiple-choice question, "
    "explicitly state the correct option.\n"
    "Your answer must be especially concise, professional, and focused on safety implications.\n";

constexpr const char* kDefensiveBlock =
    "--- AUTOMATED DETECTOR STATUS: UNRELIABLE ---\n"
    "System Report: The automated object detector found NO standard targets (People/Cars).\n"
    "CRITICAL WARNING: The detector often FAILS to see non-standard obstacles (e.g., Bicycles, "
    "Rocks, Debris).\n"
    "INSTRUCTION: IGNORE the detector's claim of 'No objects'. You MUST rely SOLELY on the "
    "Visual Images to find anomalies. If you see something in the image, TRUST THE IMAGE.\n";

constexpr const char* kUserLog = "Perception Log:\n{log}";

constexpr const char* kUserQuestion = "Question: {question}";

constexpr const char* kGenerationSystem =
    "You are a Senior Railway Operation Expert and Instructor. Your task is to analyze images "
    "from the cab view and generate professional question-answering data for an automatic train "
    "operation system.\n";

constexpr const char* kGenerationUser =
    "Analyze the provided train cab-view image. Generate one Question-Answer (QA) pair and one "
    "Choice Question (CQ).\n"
    "\n"
    "Strictly output valid JSON with no Markdown formatting (do not use json). Use the "
    "following structure:\n"
    "{\n"
    "  \"cot_perception\": \"Visual analysis: Identify signals (aspect/color)...\",\n"
    "  \"cot_reasoning\": \"Logical analysis: Interpret the visual data based...\",\n"
    "  \"cot_planning\": \"Action plan: Determine the immediate driving...\",\n"
    "  \"qa_question\": \"A critical, scenario-specific question...\",\n"
    "  \"qa_answer\": \"A detailed answer based on the analysis.\",\n"
    "  \"mc_question\": \"A multiple-choice question focusing on specific...\",\n"
    "  \"mc_options\": {\"A\": \"Option text\", \"B\": \"Option text\", ...},\n"
    "  \"mc_correct\": \"The correct option letter (e.g., 'A')\"\n"
    "}\n";

constexpr const char* kJudgeSystem =
    "You are a strict railway-domain evaluator. Score the predicted chain-of-thought against "
    "the reference on each metric of the rubric below, with integer ratings from 1 to 10.\n"
    "Avoid subjective interpretation and adhere to the given thresholds. Do not add any "
    "additional explanations beyond the structured JSON output.\n";

}  // namespace

const PromptTemplates& PromptTemplates::defaults() {
  static const PromptTemplates t{kDynamicSystem, kStaticSystem,     kDefensiveBlock,
                                 kUserLog,       kUserQuestion,     kGenerationSystem,
                                 kGenerationUser, kJudgeSystem};
  return t;
}

PromptTemplates PromptTemplates::load_dir(const std::string& dir) {
  PromptTemplates t = defaults();
  auto maybe = [&](const char* name, std::string& slot) {
    const auto path = std::filesystem::path(dir) / name;
    std::ifstream in(path);
    if (!in) return;
    std::ostringstream ss;
    ss << in.rdbuf();
    slot = ss.str();
  };
  maybe("dynamic_system.txt", t.dynamic_system);
  maybe("static_system.txt", t.static_system);
  maybe("defensive_block.txt", t.defensive_block);
  maybe("user_log.txt", t.user_log);
  maybe("user_question.txt", t.user_question);
  maybe("generation_system.txt", t.generation_system);
  maybe("generation_user.txt", t.generation_user);
  maybe("judge_system.txt", t.judge_system);
  return t;
}

std::string substitute_placeholder(std::string tpl, const std::string& key,
                                   const std::string& value) {
  const std::string token = "{" + key + "}";
  std::size_t pos = 0;
  while ((pos = tpl.find(token, pos)) != std::string::npos) {
    tpl.replace(pos, token.size(), value);
    pos += value.size();
  }
  return tpl;
}

}  // namespace railcom
