#include "railcom/core_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace railcom {

using nlohmann::json;

double Vec2::norm() const { return std::hypot(x, y); }

StreamFormat stream_format_from_string(const std::string& s) {
  if (s == "jsonl") return StreamFormat::jsonl;
  if (s == "mot_csv") return StreamFormat::mot_csv;
  throw ParseError("unknown stream format '" + s + "' (expected jsonl or mot_csv)");
}

namespace {

void check_box(const Detection& d, std::int64_t frame, int line_no) {
  if (!(d.x2 > d.x1) || !(d.y2 > d.y1)) {
    throw ParseError("degenerate box [" + std::to_string(d.x1) + "," + std::to_string(d.y1) +
                         "," + std::to_string(d.x2) + "," + std::to_string(d.y2) +
                         "] in frame " + std::to_string(frame),
                     line_no);
  }
}

Detection detection_from_json(const json& j, std::int64_t frame, int line_no) {
  Detection d;
  try {
    d.x1 = j.at("x1").get<double>();
    d.y1 = j.at("y1").get<double>();
    d.x2 = j.at("x2").get<double>();
    d.y2 = j.at("y2").get<double>();
    d.class_name = j.at("class").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad detection object: ") + e.what(), line_no);
  }
  d.score = j.value("score", 1.0);
  if (d.score < 0.0 || d.score > 1.0)
    throw ParseError("score " + std::to_string(d.score) + " outside [0,1]", line_no);
  if (j.contains("id") && !j.at("id").is_null()) {
    auto id = j.at("id").get<std::int64_t>();
    if (id < 0) throw ParseError("negative track id " + std::to_string(id), line_no);
    d.track_id = id;
  }
  check_box(d, frame, line_no);
  return d;
}

FrameRecord frame_from_json_line(const std::string& line, int line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
  }
  FrameRecord f;
  try {
    f.frame_index = j.at("frame").get<std::int64_t>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("missing frame index: ") + e.what(), line_no);
  }
  if (j.contains("ts_ms") && !j.at("ts_ms").is_null()) {
    auto ts = j.at("ts_ms").get<std::int64_t>();
    if (ts < 0) throw ParseError("negative ts_ms", line_no);
    f.timestamp_ms = ts;
  }
  if (j.contains("image") && !j.at("image").is_null())
    f.image_ref = j.at("image").get<std::string>();
  if (!j.contains("detections") || !j.at("detections").is_array())
    throw ParseError("missing detections array", line_no);
  for (const auto& dj : j.at("detections"))
    f.detections.push_back(detection_from_json(dj, f.frame_index, line_no));
  return f;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  return out;
}

}  // namespace

Scenario parse_detection_stream(std::istream& source, StreamFormat format) {
  Scenario s;
  std::map<std::int64_t, FrameRecord> frames;  // keyed by frame_index, source order kept inside
  std::string line;
  int line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (format == StreamFormat::jsonl) {
      FrameRecord f = frame_from_json_line(line, line_no);
      if (frames.count(f.frame_index))
        throw ParseError("duplicate frame_index " + std::to_string(f.frame_index), line_no);
      frames.emplace(f.frame_index, std::move(f));
    } else {
      auto cols = split_csv(line);
      if (cols.size() < 6)
        throw ParseError("MOT row needs at least 6 columns, got " + std::to_string(cols.size()),
                         line_no);
      Detection d;
      std::int64_t frame_index, id;
      double x, y, w, h;
      try {
        frame_index = std::stoll(cols[0]);
        id = std::stoll(cols[1]);
        x = std::stod(cols[2]);
        y = std::stod(cols[3]);
        w = std::stod(cols[4]);
        h = std::stod(cols[5]);
        d.score = cols.size() > 6 && !cols[6].empty() ? std::stod(cols[6]) : 1.0;
      } catch (const std::exception&) {
        throw ParseError("malformed MOT row '" + line + "'", line_no);
      }
      d.x1 = x;
      d.y1 = y;
      d.x2 = x + w;
      d.y2 = y + h;
      d.class_name = cols.size() > 7 && !cols[7].empty() ? cols[7] : "object";
      if (d.score < 0.0 || d.score > 1.0) throw ParseError("score outside [0,1]", line_no);
      if (id >= 0) d.track_id = id;
      check_box(d, frame_index, line_no);
      frames[frame_index].frame_index = frame_index;
      frames[frame_index].detections.push_back(std::move(d));
    }
  }
  for (auto& [idx, f] : frames) s.frames.push_back(std::move(f));
  return s;
}

Scenario parse_detection_stream_text(const std::string& text, StreamFormat format) {
  std::istringstream ss(text);
  return parse_detection_stream(ss, format);
}

std::string serialize_scenario_jsonl(const Scenario& s) {
  std::string out;
  for (const auto& f : s.frames) {
    json j;
    j["frame"] = f.frame_index;
    if (f.timestamp_ms) j["ts_ms"] = *f.timestamp_ms;
    if (f.image_ref) j["image"] = *f.image_ref;
    j["detections"] = json::array();
    for (const auto& d : f.detections) {
      json dj;
      dj["x1"] = d.x1;
      dj["y1"] = d.y1;
      dj["x2"] = d.x2;
      dj["y2"] = d.y2;
      dj["class"] = d.class_name;
      dj["score"] = d.score;
      if (d.track_id) dj["id"] = *d.track_id;
      j["detections"].push_back(std::move(dj));
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string serialize_scenario_mot_csv(const Scenario& s) {
  std::ostringstream out;
  for (const auto& f : s.frames)
    for (const auto& d : f.detections)
      out << f.frame_index << ',' << (d.track_id ? *d.track_id : -1) << ',' << d.x1 << ','
          << d.y1 << ',' << (d.x2 - d.x1) << ',' << (d.y2 - d.y1) << ',' << d.score << ','
          << d.class_name << '\n';
  return out.str();
}

ValidationReport validate_scenario(const Scenario& s) {
  ValidationReport r;
  auto add = [&](std::string loc, std::string rule) {
    r.violations.push_back({std::move(loc), std::move(rule)});
  };
  if (s.frames.empty()) add("scenario", "empty frame list");
  std::int64_t prev = 0;
  for (std::size_t fi = 0; fi < s.frames.size(); ++fi) {
    const auto& f = s.frames[fi];
    std::string floc = "frame " + std::to_string(f.frame_index);
    if (f.frame_index < 1) add(floc, "frame_index < 1");
    if (fi > 0 && f.frame_index <= prev) add(floc, "non-increasing frame_index");
    prev = f.frame_index;
    if (f.timestamp_ms && *f.timestamp_ms < 0) add(floc, "negative timestamp");
    for (std::size_t di = 0; di < f.detections.size(); ++di) {
      const auto& d = f.detections[di];
      std::string dloc = floc + ", detection " + std::to_string(di);
      if (d.x2 <= d.x1) add(dloc, "zero-width box");
      if (d.y2 <= d.y1) add(dloc, "zero-height box");
      if (d.score < 0.0 || d.score > 1.0) add(dloc, "score outside [0,1]");
      if (d.track_id && *d.track_id < 0) add(dloc, "negative track id");
      if (d.class_name.empty()) add(dloc, "empty class name");
    }
  }
  if (s.fps && *s.fps <= 0.0) add("scenario", "non-positive fps");
  for (std::size_t qi = 0; qi < s.questions.size(); ++qi) {
    const auto& q = s.questions[qi];
    std::string qloc = "question " + std::to_string(qi);
    for (const auto& [letter, text] : q.options)
      if (letter.size() != 1 || !std::isupper(static_cast<unsigned char>(letter[0])))
        add(qloc, "option key not a single uppercase letter");
    if (q.gold && !q.options.count(*q.gold)) add(qloc, "gold letter not an option key");
  }
  return r;
}

Scenario load_scenario_from_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw ParseError("cannot open manifest '" + manifest_path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid manifest JSON: ") + e.what());
  }
  Scenario s;
  try {
    s.id = j.at("id").get<std::string>();
    if (j.contains("fps") && !j.at("fps").is_null()) s.fps = j.at("fps").get<double>();
    auto stream = j.at("stream").get<std::string>();
    auto format = stream_format_from_string(j.at("format").get<std::string>());
    auto stream_path = std::filesystem::path(manifest_path).parent_path() / stream;
    std::ifstream sin(stream_path);
    if (!sin) throw ParseError("cannot open stream '" + stream_path.string() + "'");
    Scenario parsed = parse_detection_stream(sin, format);
    s.frames = std::move(parsed.frames);
    if (j.contains("questions")) {
      for (const auto& qj : j.at("questions")) {
        Question q;
        q.text = qj.at("text").get<std::string>();
        if (qj.contains("options") && !qj.at("options").is_null())
          for (const auto& [k, v] : qj.at("options").items())
            q.options[k] = v.get<std::string>();
        if (qj.contains("gold") && !qj.at("gold").is_null())
          q.gold = qj.at("gold").get<std::string>();
        s.questions.push_back(std::move(q));
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad manifest field: ") + e.what());
  }
  return s;
}

}  // namespace railcom
