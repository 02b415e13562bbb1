#include "railcom/pipeline.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace railcom {

using nlohmann::json;

StageError::StageError(std::string stage_, std::string scenario, const std::string& cause)
    : std::runtime_error("[" + stage_ + "] scenario '" + scenario + "': " + cause),
      stage(std::move(stage_)),
      scenario_id(std::move(scenario)) {}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ParseError("unknown config key '" + key + "' in " + where);
  }
}

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid config JSON: ") + e.what());
  }
  PipelineConfig c;
  reject_unknown(j, {"tracker", "motion", "sampler", "backend", "evaluation", "coalesce",
                     "defensive", "template_dir", "out_dir"},
                 "config root");
  if (j.contains("tracker")) {
    const auto& t = j["tracker"];
    reject_unknown(t, {"iou_min", "score_high", "delta_tol", "lambda_min"}, "tracker");
    c.tracker.iou_min = t.value("iou_min", c.tracker.iou_min);
    c.tracker.score_high = t.value("score_high", c.tracker.score_high);
    c.tracker.delta_tol = t.value("delta_tol", c.tracker.delta_tol);
    c.tracker.lambda_min = t.value("lambda_min", c.tracker.lambda_min);
  }
  if (j.contains("motion")) {
    const auto& m = j["motion"];
    reject_unknown(m, {"tau_min", "lambda_scale", "gamma", "dt"}, "motion");
    c.motion.tau_min = m.value("tau_min", c.motion.tau_min);
    c.motion.lambda_scale = m.value("lambda_scale", c.motion.lambda_scale);
    c.motion.gamma = m.value("gamma", c.motion.gamma);
    c.motion.dt = m.value("dt", c.motion.dt);
  }
  if (j.contains("sampler")) {
    const auto& s = j["sampler"];
    reject_unknown(s, {"k_max", "alpha", "tau_low", "tau_high", "w_new", "w_moving", "w_lost"},
                   "sampler");
    c.sampler.k_max = s.value("k_max", c.sampler.k_max);
    c.sampler.alpha = s.value("alpha", c.sampler.alpha);
    c.sampler.tau_low = s.value("tau_low", c.sampler.tau_low);
    c.sampler.tau_high = s.value("tau_high", c.sampler.tau_high);
    c.sampler.w_new = s.value("w_new", c.sampler.w_new);
    c.sampler.w_moving = s.value("w_moving", c.sampler.w_moving);
    c.sampler.w_lost = s.value("w_lost", c.sampler.w_lost);
  }
  if (j.contains("backend")) {
    const auto& b = j["backend"];
    reject_unknown(b, {"base_url", "model", "timeout_ms", "max_retries", "max_in_flight",
                       "mode", "mock_script"},
                   "backend");
    c.backend.base_url = b.value("base_url", c.backend.base_url);
    c.backend.model_name = b.value("model", c.backend.model_name);
    c.backend.timeout_ms = b.value("timeout_ms", c.backend.timeout_ms);
    c.backend.max_retries = b.value("max_retries", c.backend.max_retries);
    c.backend.max_in_flight = b.value("max_in_flight", c.backend.max_in_flight);
    if (b.contains("mode"))
      c.backend.mode = b["mode"] == "remote" ? BackendMode::remote : BackendMode::mock;
    c.backend.mock_script_path = b.value("mock_script", c.backend.mock_script_path);
  }
  if (j.contains("evaluation")) {
    const auto& e = j["evaluation"];
    reject_unknown(e, {"invert_penalty_metrics"}, "evaluation");
    c.evaluation.invert_penalty_metrics =
        e.value("invert_penalty_metrics", c.evaluation.invert_penalty_metrics);
  }
  c.coalesce = j.value("coalesce", c.coalesce);
  c.defensive_enabled = j.value("defensive", c.defensive_enabled);
  c.template_dir = j.value("template_dir", c.template_dir);
  c.out_dir = j.value("out_dir", c.out_dir);
  return c;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_pipeline_config(ss.str());
}

InferArtifacts run_infer_pipeline(const Scenario& scenario, const PipelineConfig& cfg,
                                  const LlmGateway& gateway) {
  const PromptTemplates tpl = cfg.template_dir.empty()
                                  ? PromptTemplates::defaults()
                                  : PromptTemplates::load_dir(cfg.template_dir);
  InferArtifacts out;
  out.report.scenario_id = scenario.id;

  const auto validation = validate_scenario(scenario);
  if (!validation.ok())
    throw StageError("validate", scenario.id,
                     validation.violations.front().rule + " at " +
                         validation.violations.front().location);

  const bool is_static = scenario.frames.size() == 1;
  SamplingPlan plan;
  std::vector<LogEntry> entries;
  std::map<std::int64_t, std::string> keyframe_images;

  if (!is_static) {
    TrackedScenario ts;
    try {
      ts = run_tracking(scenario, cfg.tracker);
    } catch (const std::exception& e) {
      throw StageError("track", scenario.id, e.what());
    }
    MotionAnnotatedScenario mas = annotate_motion(ts, cfg.motion);
    entries = build_log_entries(mas, cfg.coalesce);
    for (const auto& e : entries) {
      out.event_log += render_log_line(e);
      out.event_log += '\n';
    }
    try {
      plan = plan_sampling(mas, cfg.sampler);
    } catch (const std::exception& e) {
      throw StageError("sample", scenario.id, e.what());
    }
    for (std::int64_t kf : plan.keyframes) {
      const auto& f = scenario.frames[static_cast<std::size_t>(kf - 1)];
      if (f.image_ref) keyframe_images[kf] = *f.image_ref;
    }
  }

  const auto questions =
      scenario.questions.empty() ? std::vector<Question>{{"Describe the scene.", {}, {}}}
                                 : scenario.questions;
  for (const auto& q : questions) {
    QuestionRecord rec;
    rec.question = q.text;
    rec.gold = q.gold;
    PromptBundle bundle;
    try {
      if (is_static) {
        rec.static_mode = true;
        bundle = compose_static_prompt(scenario.frames.front(), q.text, scenario.id, tpl);
      } else {
        bundle = compose_dynamic_prompt(plan, scenario.frame_count(), entries, q.text,
                                        keyframe_images, scenario.id, tpl);
        if (!cfg.defensive_enabled && bundle.defensive) {
          // forced off: rebuild without the block
          std::erase_if(bundle.user_parts,
                        [](const PromptPart& p) { return p.role == PartRole::defensive; });
          bundle.defensive = false;
        }
        rec.keyframes = plan.keyframes;
        rec.budget = plan.budget;
        rec.complexity = plan.complexity;
      }
      rec.defensive = bundle.defensive;
    } catch (const std::exception& e) {
      throw StageError("prompt", scenario.id, e.what());
    }
    LmmResult result;
    try {
      result = gateway.complete(bundle);
    } catch (const std::exception& e) {
      throw StageError("complete", scenario.id, e.what());
    }
    try {
      rec.cot = parse_cot_response(result.text);
    } catch (const CotParseError& e) {
      throw StageError("parse", scenario.id, e.what());
    }
    rec.choice = extract_choice(rec.cot);
    rec.completion_tokens = result.completion_tokens;
    rec.latency_ms = result.latency_ms;
    out.report.questions.push_back(std::move(rec));
  }
  out.report.finalize_totals();
  return out;
}

}  // namespace railcom
