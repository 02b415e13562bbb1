#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "railcom/motion.hpp"

namespace railcom {

struct VisibleItem {
  std::string class_name;
  std::int64_t track_id = 0;
  std::int64_t x1 = 0, y1 = 0, x2 = 0, y2 = 0;  // rounded at log time
  std::string motion_label;
  friend bool operator==(const VisibleItem&, const VisibleItem&) = default;
};

struct LostItem {
  std::string class_name;
  std::int64_t track_id = 0;
  std::int64_t cx = 0, cy = 0;  // predicted center, rounded
  friend bool operator==(const LostItem&, const LostItem&) = default;
};

// One rendered log line covering an inclusive frame range. An entry with no
// visible and no lost items renders as "No objects.".
struct LogEntry {
  std::int64_t start = 0;
  std::int64_t end = 0;
  std::vector<VisibleItem> visible;
  std::vector<LostItem> lost;
  bool empty() const { return visible.empty() && lost.empty(); }
  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

// Quantizes a motion sample into the log vocabulary: "stationary", the
// dominant-axis labels, or "approaching"/"receding" when only the area
// clause fired.
std::string direction_label(const Vec2& v, double rho, KinematicState state, double tau_dyn);
std::string direction_label(const MotionSample& s);

// Linear extrapolation from the last observation before frame_index.
Point predict_lost_position(const Track& track, std::int64_t frame_index);

std::vector<LogEntry> build_log_entries(const MotionAnnotatedScenario& mas, bool coalesce);
std::vector<LogEntry> expand_log_entries(const std::vector<LogEntry>& entries);

std::string render_log_line(const LogEntry& e);
std::string render_event_log(const MotionAnnotatedScenario& mas, bool coalesce);

// Inverse of the line grammar; throws ParseError on any deviation.
LogEntry parse_log_line(const std::string& line);
std::vector<LogEntry> parse_event_log(const std::string& text);

}  // namespace railcom
