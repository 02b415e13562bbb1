#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace railcom {

// Error raised while reading a detection stream. Carries the 1-based line
// number of the offending input line when known.
struct ParseError : std::runtime_error {
  int line = 0;
  ParseError(const std::string& msg, int line_no = 0)
      : std::runtime_error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + msg : msg),
        line(line_no) {}
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  double norm() const;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

// Axis-aligned box in image space, origin top-left, +X right, +Y down.
// Invariant x2 > x1 and y2 > y1, so area and width are strictly positive.
struct Detection {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  std::string class_name;
  double score = 1.0;
  std::optional<std::int64_t> track_id;

  Point center() const { return {(x1 + x2) / 2.0, (y1 + y2) / 2.0}; }
  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return (x2 - x1) * (y2 - y1); }

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct FrameRecord {
  std::int64_t frame_index = 1;
  std::optional<std::int64_t> timestamp_ms;
  std::optional<std::string> image_ref;
  std::vector<Detection> detections;

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

struct Question {
  std::string text;
  std::map<std::string, std::string> options;  // letter -> option text
  std::optional<std::string> gold;             // letter, must be an option key

  friend bool operator==(const Question&, const Question&) = default;
};

struct Scenario {
  std::string id;
  std::vector<FrameRecord> frames;
  std::optional<double> fps;
  std::vector<Question> questions;

  std::int64_t frame_count() const { return static_cast<std::int64_t>(frames.size()); }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct Violation {
  std::string location;  // e.g. "frame 3, detection 1"
  std::string rule;      // short rule name, e.g. "zero-width box"
  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

enum class StreamFormat { jsonl, mot_csv };

StreamFormat stream_format_from_string(const std::string& s);

// Reads one frame object per line (JSONL) or one MOT CSV row
// `frame,id,x,y,w,h,score,class` per line. Frames come back sorted by
// frame_index; detection order within a frame follows the source.
Scenario parse_detection_stream(std::istream& source, StreamFormat format);
Scenario parse_detection_stream_text(const std::string& text, StreamFormat format);

// Canonical JSONL serialization (one frame per line, fields in schema order).
std::string serialize_scenario_jsonl(const Scenario& s);
std::string serialize_scenario_mot_csv(const Scenario& s);

// Pure invariant check; violations are data, not failures.
ValidationReport validate_scenario(const Scenario& s);

// Scenario manifest: {"id", "fps"?, "stream", "format", "questions"}.
// Loads the manifest and the stream it points to (relative to the manifest).
Scenario load_scenario_from_manifest(const std::string& manifest_path);

}  // namespace railcom
