#include "railcom/prompting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>

namespace railcom {

namespace {

std::string join_missing(const std::vector<std::string>& missing) {
  std::string out = "missing CoT section(s):";
  for (const auto& m : missing) out += " " + m;
  return out;
}

}  // namespace

CotParseError::CotParseError(std::vector<std::string> missing, std::string raw)
    : std::runtime_error(join_missing(missing)),
      missing_sections(std::move(missing)),
      raw_text(std::move(raw)) {}

bool defensive_trigger(const std::vector<LogEntry>& entries) {
  if (entries.empty()) throw std::invalid_argument("defensive_trigger: no entries");
  std::int64_t total = 0, empty = 0;
  for (const auto& e : entries) {
    const std::int64_t n = e.end - e.start + 1;  // coalesced ranges count expanded
    total += n;
    if (e.empty()) empty += n;
  }
  return static_cast<double>(empty) / static_cast<double>(total) > 0.8;
}

PromptBundle compose_dynamic_prompt(const SamplingPlan& plan, std::int64_t total_frames,
                                    const std::vector<LogEntry>& entries,
                                    const std::string& question,
                                    const std::map<std::int64_t, std::string>& keyframe_images,
                                    const std::string& scenario_id, const PromptTemplates& tpl) {
  if (plan.keyframes.empty())
    throw std::invalid_argument("compose_dynamic_prompt: empty keyframe set");
  PromptBundle b;
  b.scenario_id = scenario_id;
  b.mode = PromptMode::dynamic_mode;
  b.system_text = tpl.dynamic_system;
  b.question_text = question;
  for (std::int64_t kf : plan.keyframes) {
    const std::string label = "Seq: " + std::to_string(kf) + "/" + std::to_string(total_frames);
    auto it = keyframe_images.find(kf);
    if (it != keyframe_images.end()) {
      b.user_parts.push_back({PartRole::image, it->second, label});
    } else {
      b.user_parts.push_back(
          {PartRole::text, "[missing keyframe image for frame " + std::to_string(kf) + " (" +
                               label + ")]",
           ""});
    }
  }
  std::string log;
  for (const auto& e : entries) {
    log += render_log_line(e);
    log += '\n';
  }
  b.user_parts.push_back({PartRole::log, substitute_placeholder(tpl.user_log, "log", log), ""});
  b.user_parts.push_back(
      {PartRole::question, substitute_placeholder(tpl.user_question, "question", question), ""});
  if (defensive_trigger(entries)) return inject_defensive_block(b, tpl);
  return b;
}

PromptBundle compose_static_prompt(const FrameRecord& frame, const std::string& question,
                                   const std::string& scenario_id, const PromptTemplates& tpl) {
  PromptBundle b;
  b.scenario_id = scenario_id;
  b.mode = PromptMode::static_mode;
  b.system_text = tpl.static_system;
  b.question_text = question;
  if (frame.image_ref) b.user_parts.push_back({PartRole::image, *frame.image_ref, "Seq: 1/1"});

  std::vector<Detection> dets = frame.detections;
  std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
    return a.track_id.value_or(std::numeric_limits<std::int64_t>::max()) <
           b.track_id.value_or(std::numeric_limits<std::int64_t>::max());
  });
  std::ostringstream block;
  if (dets.empty()) {
    block << "No objects.";
  } else {
    for (std::size_t i = 0; i < dets.size(); ++i) {
      const auto& d = dets[i];
      if (i) block << '\n';
      block << d.class_name;
      if (d.track_id) block << " (ID:" << *d.track_id << ")";
      block << " at [" << std::llround(d.x1) << ',' << std::llround(d.y1) << ','
            << std::llround(d.x2) << ',' << std::llround(d.y2) << ']';
    }
  }
  b.user_parts.push_back({PartRole::annotation, block.str(), ""});
  b.user_parts.push_back(
      {PartRole::question, substitute_placeholder(tpl.user_question, "question", question), ""});
  return b;
}

PromptBundle inject_defensive_block(const PromptBundle& b, const PromptTemplates& tpl) {
  if (b.defensive)
    throw std::invalid_argument("inject_defensive_block: bundle already defensive");
  PromptBundle out = b;
  out.defensive = true;
  PromptPart block{PartRole::defensive, tpl.defensive_block, ""};
  auto it = std::find_if(out.user_parts.begin(), out.user_parts.end(),
                         [](const PromptPart& p) { return p.role == PartRole::log; });
  if (it != out.user_parts.end())
    out.user_parts.insert(it + 1, std::move(block));
  else
    out.user_parts.push_back(std::move(block));
  return out;
}

namespace {

// Header line: optional markdown decoration, a section keyword, optional
// decoration/punctuation, then optional inline content.
const std::regex kHeaderLine(
    R"(^\s*[#>\-\*_\s]*(perceiving|perception|reasoning|planning|final\s*answer)\s*[\*_]*\s*[:.\-]?\s*[\*_]*\s*(.*)$)",
    std::regex::icase);

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string canonical_section(std::string key) {
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (key == "perception") return "perceiving";
  if (key.rfind("final", 0) == 0) return "final answer";
  return key;
}

}  // namespace

CoTResponse parse_cot_response(const std::string& text) {
  std::map<std::string, std::string> sections;
  std::string current;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    std::smatch m;
    if (std::regex_match(line, m, kHeaderLine)) {
      current = canonical_section(m[1]);
      if (!sections.count(current)) sections[current] = "";
      const std::string inline_part = trim(m[2]);
      if (!inline_part.empty()) {
        if (!sections[current].empty()) sections[current] += '\n';
        sections[current] += inline_part;
      }
    } else if (!current.empty()) {
      const std::string body = trim(line);
      if (!body.empty()) {
        if (!sections[current].empty()) sections[current] += '\n';
        sections[current] += body;
      }
    }
  }
  std::vector<std::string> missing;
  for (const char* key : {"perceiving", "reasoning", "planning", "final answer"}) {
    auto it = sections.find(key);
    if (it == sections.end() || trim(it->second).empty())
      missing.push_back(key == std::string("perceiving") ? "Perceiving"
                        : key == std::string("final answer")
                            ? "Final Answer"
                            : std::string(1, std::toupper(key[0])) + (key + 1));
  }
  if (!missing.empty()) throw CotParseError(std::move(missing), text);
  CoTResponse r;
  r.perceiving = sections["perceiving"];
  r.reasoning = sections["reasoning"];
  r.planning = sections["planning"];
  r.final_answer = sections["final answer"];
  return r;
}

namespace {

const std::regex kPhraseRe(R"re((?:[Oo]ption|[Aa]nswer)(?:\s+is)?\s+['"]?\(?([A-Z])(?![A-Za-z]))re");
const std::regex kPunctRe(R"((?:^|[^A-Za-z0-9])([A-Z])[\).:;,])");
const std::regex kBareRe(R"re((?:^|[\s("'])([A-Z])(?=\s+(?:or|and)\s|\s*$|[)"']))re");
// letters on the far side of a conjunction ("A or C") count toward ambiguity
const std::regex kConjRe(R"re(\b(?:or|and)\s+['"(]?([A-Z])(?![A-Za-z]))re");

void collect(const std::string& text, const std::regex& re, std::set<char>& letters) {
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re);
       it != std::sregex_iterator(); ++it)
    letters.insert((*it)[1].str()[0]);
}

}  // namespace

std::optional<std::string> extract_choice(const std::string& text) {
  std::set<char> letters;
  collect(text, kPhraseRe, letters);
  collect(text, kPunctRe, letters);
  collect(text, kBareRe, letters);
  collect(text, kConjRe, letters);
  if (letters.size() != 1) return std::nullopt;  // absent or ambiguous
  return std::string(1, *letters.begin());
}

std::optional<std::string> extract_choice(const CoTResponse& r) {
  if (auto c = extract_choice(r.final_answer)) return c;
  return extract_choice(r.perceiving + "\n" + r.reasoning + "\n" + r.planning + "\n" +
                        r.final_answer);
}

}  // namespace railcom
