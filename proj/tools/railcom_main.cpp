#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "railcom/metrics_report.hpp"
#include "railcom/pipeline.hpp"

using namespace railcom;
namespace fs = std::filesystem;

namespace {

// Distinct nonzero exit codes per failure family.
enum ExitCode : int {
  exit_usage = 1,
  exit_validate = 2,
  exit_track = 3,
  exit_analyze = 4,
  exit_log = 5,
  exit_sample = 6,
  exit_prompt = 7,
  exit_complete = 8,
  exit_parse = 9,
  exit_judge = 10,
  exit_config = 11,
  exit_io = 12,
};

int exit_code_for_stage(const std::string& stage) {
  if (stage == "validate") return exit_validate;
  if (stage == "track") return exit_track;
  if (stage == "annotate") return exit_analyze;
  if (stage == "log") return exit_log;
  if (stage == "sample") return exit_sample;
  if (stage == "prompt") return exit_prompt;
  if (stage == "complete") return exit_complete;
  if (stage == "parse") return exit_parse;
  return exit_io;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path.string() + "'");
  out << content;
}

struct CommonOpts {
  std::string config_path;
  std::string format = "jsonl";
  std::string out_dir = ".";
  bool coalesce = false;
  bool no_defensive = false;
  std::string mock_script;
  int jobs = 1;
};

PipelineConfig resolve_config(const CommonOpts& o) {
  PipelineConfig cfg;
  if (!o.config_path.empty()) cfg = load_pipeline_config(o.config_path);
  cfg.backend = LlmGateway::config_from_env(cfg.backend);
  if (o.coalesce) cfg.coalesce = true;
  if (o.no_defensive) cfg.defensive_enabled = false;
  if (!o.mock_script.empty()) {
    cfg.backend.mode = BackendMode::mock;
    cfg.backend.mock_script_path = o.mock_script;
  }
  cfg.out_dir = o.out_dir;
  return cfg;
}

Scenario load_input(const std::string& path, const std::string& format) {
  if (fs::path(path).extension() == ".json") return load_scenario_from_manifest(path);
  Scenario s = parse_detection_stream_text(slurp(path), stream_format_from_string(format));
  s.id = fs::path(path).stem().string();
  return s;
}

MotionAnnotatedScenario analyze_scenario(const Scenario& s, const PipelineConfig& cfg) {
  return annotate_motion(run_tracking(s, cfg.tracker), cfg.motion);
}

void add_common(CLI::App* cmd, CommonOpts& o, bool with_backend = false) {
  cmd->add_option("--config", o.config_path, "pipeline config JSON");
  cmd->add_option("--format", o.format, "input stream format")
      ->check(CLI::IsMember({"jsonl", "mot_csv"}));
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_flag("--coalesce", o.coalesce, "merge identical adjacent log lines");
  cmd->add_flag("--no-defensive", o.no_defensive, "disable the defensive prompt block");
  if (with_backend) {
    cmd->add_option("--mock", o.mock_script, "mock backend script path");
    cmd->add_option("--jobs", o.jobs, "parallel scenarios")->check(CLI::PositiveNumber);
  }
}

int run_infer(const std::vector<std::string>& inputs, const CommonOpts& opts) {
  const PipelineConfig cfg = resolve_config(opts);
  const LlmGateway gateway(cfg.backend);
  std::mutex mu;
  std::vector<std::pair<int, std::string>> failures;
  std::vector<std::string> written;
  std::size_t next = 0;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (next >= inputs.size()) return;
        i = next++;
      }
      try {
        Scenario s = load_input(inputs[i], opts.format);
        auto art = run_infer_pipeline(s, cfg, gateway);
        const fs::path base = fs::path(cfg.out_dir) / s.id;
        spill(base.string() + ".report.json", serialize_run_report(art.report));
        if (!art.event_log.empty()) spill(base.string() + ".log.txt", art.event_log);
        std::lock_guard lock(mu);
        written.push_back(base.string() + ".report.json");
      } catch (const StageError& e) {
        std::lock_guard lock(mu);
        failures.emplace_back(exit_code_for_stage(e.stage), e.what());
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        failures.emplace_back(exit_io, e.what());
      }
    }
  };
  std::vector<std::thread> pool;
  const int n = std::max(1, std::min<int>(opts.jobs, static_cast<int>(inputs.size())));
  for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& w : written) std::cout << w << '\n';
  for (const auto& [code, msg] : failures) std::cerr << "error: " << msg << '\n';
  return failures.empty() ? 0 : failures.front().first;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detection-stream middleware: tracking, motion logs, adaptive sampling, "
               "prompting, and evaluation"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::vector<std::string> inputs;
  std::string preset_name, spec_path, reference_path, json_out, table_out, image_ref;
  std::vector<std::string> run_specs;

  auto* ingest = app.add_subcommand("ingest", "parse and validate a detection stream");
  ingest->add_option("input", inputs, "stream file(s) or manifest")->required();
  add_common(ingest, opts);

  auto* track = app.add_subcommand("track", "associate detections into tracks");
  track->add_option("input", inputs, "stream file or manifest")->required();
  add_common(track, opts);

  auto* analyze = app.add_subcommand("analyze", "annotate tracks with motion state");
  analyze->add_option("input", inputs, "stream file or manifest")->required();
  add_common(analyze, opts);

  auto* logc = app.add_subcommand("log", "render the structured event log");
  logc->add_option("input", inputs, "stream file or manifest")->required();
  add_common(logc, opts);

  auto* sample = app.add_subcommand("sample", "compute the adaptive keyframe plan");
  sample->add_option("input", inputs, "stream file or manifest")->required();
  add_common(sample, opts);

  auto* calibrate = app.add_subcommand("calibrate", "derive tau_low/tau_high from a corpus");
  calibrate->add_option("input", inputs, "stream files or manifests")->required();
  add_common(calibrate, opts);

  auto* infer = app.add_subcommand("infer", "run the full pipeline against a backend");
  infer->add_option("input", inputs, "manifests, stream files, or preset names")->required();
  add_common(infer, opts, true);

  auto* judge = app.add_subcommand("judge", "score a run report against a reference");
  judge->add_option("report", inputs, "run report JSON")->required();
  judge->add_option("--reference", reference_path, "reference CoT text file")->required();
  add_common(judge, opts, true);

  auto* genqa = app.add_subcommand("generate-qa", "generate a QA/CQ record for an image");
  genqa->add_option("image", image_ref, "image reference")->required();
  add_common(genqa, opts, true);

  auto* synth = app.add_subcommand("synth", "generate a synthetic scenario");
  synth->add_option("--preset", preset_name, "named fixture");
  synth->add_option("--spec", spec_path, "synth spec JSON file");
  add_common(synth, opts);

  auto* reportc = app.add_subcommand("report", "compare run reports");
  reportc->add_option("--runs", run_specs, "label=path pairs")->required()->expected(-2);
  reportc->add_option("--json", json_out, "JSON output path");
  reportc->add_option("--table", table_out, "table output path");

  CLI11_PARSE(app, argc, argv);

  try {
    const PipelineConfig cfg = resolve_config(opts);

    if (ingest->parsed()) {
      for (const auto& in : inputs) {
        Scenario s = load_input(in, opts.format);
        auto report = validate_scenario(s);
        for (const auto& v : report.violations)
          std::cerr << s.id << ": " << v.location << ": " << v.rule << '\n';
        if (!report.ok()) return exit_validate;
        spill(fs::path(cfg.out_dir) / (s.id + ".stream.jsonl"), serialize_scenario_jsonl(s));
      }
      return 0;
    }
    if (track->parsed()) {
      Scenario s = load_input(inputs.front(), opts.format);
      auto ts = run_tracking(s, cfg.tracker);
      spill(fs::path(cfg.out_dir) / (s.id + ".tracks.json"), serialize_tracks_json(ts.tracks));
      spill(fs::path(cfg.out_dir) / (s.id + ".tracked.jsonl"),
            serialize_scenario_jsonl(ts.scenario));
      return 0;
    }
    if (analyze->parsed()) {
      Scenario s = load_input(inputs.front(), opts.format);
      auto mas = analyze_scenario(s, cfg);
      spill(fs::path(cfg.out_dir) / (s.id + ".annotated.jsonl"),
            serialize_annotated_jsonl(mas));
      return 0;
    }
    if (logc->parsed()) {
      Scenario s = load_input(inputs.front(), opts.format);
      auto mas = analyze_scenario(s, cfg);
      std::cout << render_event_log(mas, cfg.coalesce);
      return 0;
    }
    if (sample->parsed()) {
      Scenario s = load_input(inputs.front(), opts.format);
      auto mas = analyze_scenario(s, cfg);
      std::cout << serialize_plan_json(plan_sampling(mas, cfg.sampler), cfg.sampler) << '\n';
      return 0;
    }
    if (calibrate->parsed()) {
      std::vector<double> complexities;
      for (const auto& in : inputs) {
        auto mas = analyze_scenario(load_input(in, opts.format), cfg);
        complexities.push_back(plan_sampling(mas, cfg.sampler).complexity);
      }
      auto [lo, hi] = calibrate_thresholds(complexities);
      nlohmann::json j{{"tau_low", lo}, {"tau_high", hi}, {"n", complexities.size()}};
      std::cout << j.dump(2) << '\n';
      return 0;
    }
    if (infer->parsed()) {
      std::vector<std::string> resolved;
      for (const auto& in : inputs) {
        if (fs::exists(in)) {
          resolved.push_back(in);
        } else {
          // preset names are materialized into the output directory first
          auto [s, gt] = generate_scenario(preset(in));
          const fs::path dir = fs::path(opts.out_dir);
          spill(dir / (in + ".stream.jsonl"), serialize_scenario_jsonl(s));
          nlohmann::json m{{"id", in}, {"stream", in + ".stream.jsonl"}, {"format", "jsonl"}};
          spill(dir / (in + ".manifest.json"), m.dump(2));
          resolved.push_back((dir / (in + ".manifest.json")).string());
        }
      }
      return run_infer(resolved, opts);
    }
    if (judge->parsed()) {
      RunReport rep = parse_run_report(slurp(inputs.front()));
      const std::string reference = slurp(reference_path);
      const LlmGateway gateway(cfg.backend);
      std::vector<JudgeScores> scores;
      for (const auto& q : rep.questions) {
        auto bundle = build_judge_prompt(q.cot, reference, rep.scenario_id);
        scores.push_back(parse_judge_scores(gateway.complete(bundle).text));
      }
      if (scores.empty()) {
        std::cerr << "error: report has no questions to judge\n";
        return exit_judge;
      }
      rep.scores = aggregate_scores(scores, cfg.evaluation);
      const fs::path out = fs::path(cfg.out_dir) / (rep.scenario_id + ".judged.json");
      spill(out, serialize_run_report(rep));
      std::cout << out.string() << '\n';
      return 0;
    }
    if (genqa->parsed()) {
      const LlmGateway gateway(cfg.backend);
      auto bundle = build_generation_prompt(image_ref);
      bundle.scenario_id = fs::path(image_ref).stem().string();
      auto result = gateway.complete(bundle);
      validate_qa_record(result.text);
      std::cout << result.text << '\n';
      return 0;
    }
    if (synth->parsed()) {
      SynthSpec spec;
      if (!spec_path.empty())
        spec = parse_synth_spec(slurp(spec_path));
      else if (!preset_name.empty())
        spec = preset(preset_name);
      else {
        std::cerr << "error: synth needs --preset or --spec\n";
        return exit_usage;
      }
      auto [s, gt] = generate_scenario(spec, cfg.motion);
      const fs::path dir = fs::path(cfg.out_dir);
      spill(dir / (spec.id + ".stream.jsonl"), serialize_scenario_jsonl(s));
      spill(dir / (spec.id + ".truth.json"), serialize_ground_truth(gt));
      std::cout << (dir / (spec.id + ".stream.jsonl")).string() << '\n';
      return 0;
    }
    if (reportc->parsed()) {
      std::vector<LabeledRun> runs;
      for (const auto& rs : run_specs) {
        const auto eq = rs.find('=');
        if (eq == std::string::npos) {
          std::cerr << "error: --runs expects label=path, got '" << rs << "'\n";
          return exit_usage;
        }
        runs.push_back({rs.substr(0, eq), parse_run_report(slurp(rs.substr(eq + 1)))});
      }
      auto cmp = compare_runs(runs);
      const std::string table = render_comparison_table(cmp);
      if (!table_out.empty())
        spill(table_out, table);
      else
        std::cout << table;
      if (!json_out.empty()) spill(json_out, serialize_comparison_json(cmp));
      return 0;
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for_stage(e.stage);
  } catch (const JudgeParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_judge;
  } catch (const QaValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_judge;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_io;
  }
  return exit_usage;
}
