#include "railcom/memlog.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace railcom {

std::string direction_label(const Vec2& v, double rho, KinematicState state, double tau_dyn) {
  if (state == KinematicState::Static) return "stationary";
  if (v.norm() >= tau_dyn) {
    if (std::abs(v.x) >= std::abs(v.y)) return v.x < 0 ? "moving left" : "moving right";
    return v.y < 0 ? "moving up" : "moving down";
  }
  // Moving only via the area clause: depth-wise motion.
  return rho > 0 ? "approaching" : "receding";
}

std::string direction_label(const MotionSample& s) {
  return direction_label(s.velocity, s.area_rate, s.state, s.tau_dyn);
}

Point predict_lost_position(const Track& track, std::int64_t frame_index) {
  if (track.history.empty()) throw std::invalid_argument("predict_lost_position: empty history");
  // Last observation at or before frame_index; its velocity comes from the
  // preceding observation (zero when the history has a single entry).
  std::size_t i = track.history.size();
  while (i > 0 && track.history[i - 1].first > frame_index) --i;
  if (i == 0) throw std::invalid_argument("predict_lost_position: no observation before frame");
  const auto& [lf, ld] = track.history[i - 1];
  const Point c = ld.center();
  Vec2 v{0.0, 0.0};
  if (i >= 2) {
    const auto& [pf, pd] = track.history[i - 2];
    v = motion_vector(c, pd.center(), lf - pf);
  }
  const double gap = static_cast<double>(frame_index - lf);
  return {c.x + v.x * gap, c.y + v.y * gap};
}

namespace {

std::int64_t iround(double v) { return std::llround(v); }

LogEntry entry_for_frame(const MotionAnnotatedScenario& mas, std::int64_t frame) {
  LogEntry e;
  e.start = e.end = frame;
  const auto& tracks = mas.tracked.tracks;
  for (std::size_t ti = 0; ti < tracks.size(); ++ti) {
    const Track& tr = tracks[ti];
    if (const MotionSample* s = mas.sample_at(tr.track_id, frame)) {
      const Detection* det = nullptr;
      for (const auto& [f, d] : tr.history)
        if (f == frame) det = &d;
      VisibleItem vi;
      vi.class_name = tr.class_name;
      vi.track_id = tr.track_id;
      vi.x1 = iround(det->x1);
      vi.y1 = iround(det->y1);
      vi.x2 = iround(det->x2);
      vi.y2 = iround(det->y2);
      vi.motion_label = direction_label(*s);
      e.visible.push_back(std::move(vi));
      continue;
    }
    for (const auto& [a, b] : tr.lost_spans) {
      if (frame < a || frame > b) continue;
      const Point p = predict_lost_position(tr, frame);
      e.lost.push_back({tr.class_name, tr.track_id, iround(p.x), iround(p.y)});
      break;
    }
  }
  auto by_id = [](const auto& a, const auto& b) { return a.track_id < b.track_id; };
  std::sort(e.visible.begin(), e.visible.end(), by_id);
  std::sort(e.lost.begin(), e.lost.end(), by_id);
  return e;
}

std::string render_items(const LogEntry& e) {
  if (e.empty()) return "No objects.";
  std::ostringstream out;
  bool first = true;
  for (const auto& v : e.visible) {
    if (!first) out << " | ";
    first = false;
    out << v.class_name << " (ID:" << v.track_id << ") at [" << v.x1 << ',' << v.y1 << ','
        << v.x2 << ',' << v.y2 << "] Motion: " << v.motion_label;
  }
  for (const auto& l : e.lost) {
    if (!first) out << " | ";
    first = false;
    out << l.class_name << " (ID:" << l.track_id << ") [Occluded/Lost] predicted at approx ["
        << l.cx << ", " << l.cy << ']';
  }
  return out.str();
}

}  // namespace

std::vector<LogEntry> build_log_entries(const MotionAnnotatedScenario& mas, bool coalesce) {
  std::vector<LogEntry> entries;
  for (const auto& f : mas.tracked.scenario.frames) {
    LogEntry e = entry_for_frame(mas, f.frame_index);
    if (coalesce && !entries.empty()) {
      LogEntry& prev = entries.back();
      if (prev.end + 1 == e.start && render_items(prev) == render_items(e)) {
        prev.end = e.start;
        continue;
      }
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<LogEntry> expand_log_entries(const std::vector<LogEntry>& entries) {
  std::vector<LogEntry> out;
  for (const auto& e : entries)
    for (std::int64_t f = e.start; f <= e.end; ++f) {
      LogEntry x = e;
      x.start = x.end = f;
      out.push_back(std::move(x));
    }
  return out;
}

std::string render_log_line(const LogEntry& e) {
  std::ostringstream out;
  out << "Frame " << e.start;
  if (e.end != e.start) out << " to Frame " << e.end;
  out << ": " << render_items(e);
  return out.str();
}

std::string render_event_log(const MotionAnnotatedScenario& mas, bool coalesce) {
  std::string out;
  for (const auto& e : build_log_entries(mas, coalesce)) {
    out += render_log_line(e);
    out += '\n';
  }
  return out;
}

namespace {

const std::regex kHeaderRe(R"(^Frame (\d+)(?: to Frame (\d+))?: (.*)$)");
const std::regex kVisibleRe(
    R"(^(.+?) \(ID:(\d+)\) at \[(-?\d+),(-?\d+),(-?\d+),(-?\d+)\] Motion: (.+)$)");
const std::regex kLostRe(
    R"(^(.+?) \(ID:(\d+)\) \[Occluded/Lost\] predicted at approx \[(-?\d+), (-?\d+)\]$)");

}  // namespace

LogEntry parse_log_line(const std::string& line) {
  std::smatch m;
  if (!std::regex_match(line, m, kHeaderRe))
    throw ParseError("log line does not match grammar: '" + line + "'");
  LogEntry e;
  e.start = std::stoll(m[1]);
  e.end = m[2].matched ? std::stoll(m[2]) : e.start;
  if (e.start > e.end) throw ParseError("log range start > end: '" + line + "'");
  const std::string items = m[3];
  if (items == "No objects.") return e;
  std::size_t pos = 0;
  while (pos <= items.size()) {
    std::size_t sep = items.find(" | ", pos);
    const std::string item = items.substr(pos, sep == std::string::npos ? sep : sep - pos);
    std::smatch im;
    if (std::regex_match(item, im, kVisibleRe)) {
      e.visible.push_back({im[1], std::stoll(im[2]), std::stoll(im[3]), std::stoll(im[4]),
                           std::stoll(im[5]), std::stoll(im[6]), im[7]});
    } else if (std::regex_match(item, im, kLostRe)) {
      e.lost.push_back({im[1], std::stoll(im[2]), std::stoll(im[3]), std::stoll(im[4])});
    } else {
      throw ParseError("log item does not match grammar: '" + item + "'");
    }
    if (sep == std::string::npos) break;
    pos = sep + 3;
  }
  return e;
}

std::vector<LogEntry> parse_event_log(const std::string& text) {
  std::vector<LogEntry> out;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    out.push_back(parse_log_line(line));
  }
  return out;
}

}  // namespace railcom
