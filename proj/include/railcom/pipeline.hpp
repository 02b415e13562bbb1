#pragma once

#include <string>

#include "railcom/evaluation.hpp"
#include "railcom/llm_gateway.hpp"
#include "railcom/memlog.hpp"
#include "railcom/sampler.hpp"
#include "railcom/synth.hpp"
#include "railcom/tracker.hpp"

namespace railcom {

struct PipelineConfig {
  TrackerConfig tracker;
  MotionConfig motion;
  SamplerConfig sampler;
  BackendConfig backend;
  EvaluationConfig evaluation;
  bool coalesce = true;
  bool defensive_enabled = true;
  std::string template_dir;  // empty: built-in templates
  std::string out_dir = ".";
};

// JSON config file mirroring PipelineConfig; unknown keys are rejected.
PipelineConfig parse_pipeline_config(const std::string& json_text);
PipelineConfig load_pipeline_config(const std::string& path);

struct StageError : std::runtime_error {
  std::string stage;
  std::string scenario_id;
  StageError(std::string stage_, std::string scenario, const std::string& cause);
};

struct InferArtifacts {
  RunReport report;
  std::string event_log;  // rendered memory log (dynamic scenarios)
};

// Full pipeline for one scenario: track, annotate, log, sample, prompt,
// complete, parse. Single-frame scenarios route through the static prompt
// and skip the sampler.
InferArtifacts run_infer_pipeline(const Scenario& scenario, const PipelineConfig& cfg,
                                  const LlmGateway& gateway);

}  // namespace railcom
