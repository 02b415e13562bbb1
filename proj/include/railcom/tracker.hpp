#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "railcom/core_model.hpp"

namespace railcom {

enum class TrackStatus { active, lost, terminated };

struct Track {
  std::int64_t track_id = 0;
  std::string class_name;
  std::vector<std::pair<std::int64_t, Detection>> history;  // (frame_index, detection)
  TrackStatus status = TrackStatus::active;
  std::int64_t last_seen_frame = 0;
  Point last_center;
  double last_width = 0.0;
  std::optional<Vec2> last_velocity;  // px/frame, from the last two observations
  std::vector<std::pair<std::int64_t, std::int64_t>> lost_spans;  // inclusive [begin,end]
};

struct TrackerConfig {
  double iou_min = 0.3;
  double score_high = 0.5;
  std::int64_t delta_tol = 15;  // frames a lost track stays recoverable
  double lambda_min = 60.0;     // px, floor of the recovery search radius
};

struct TrackerState {
  std::vector<Track> tracks;  // active + lost + terminated, in creation order
  std::int64_t next_id = 1;
  std::int64_t current_frame = 0;
};

enum class AssignmentOrigin { matched, recovered, fresh };

struct Assignment {
  std::size_t detection_index = 0;
  std::int64_t track_id = 0;
  AssignmentOrigin origin = AssignmentOrigin::matched;
};

struct TrackedScenario {
  Scenario scenario;  // detections carry resolved track ids
  std::vector<std::vector<Assignment>> assignments;  // per frame
  std::vector<Track> tracks;
};

// Intersection over union of two boxes; symmetric, 1 iff identical.
double iou(const Detection& a, const Detection& b);

// Two-stage greedy IoU association: high-score detections first, then the
// rest, then lost-track recovery, then new-track spawning. Unmatched active
// tracks turn lost; lost tracks older than delta_tol terminate.
std::vector<Assignment> associate_frame(TrackerState& state, const FrameRecord& frame,
                                        const TrackerConfig& cfg);

// Joint spatio-temporal recovery constraint: class equality, gap within
// delta_tol, center distance below max(2 * candidate width, lambda_min).
bool recover_lost_track(const Detection& candidate, std::int64_t frame_index, const Track& lost,
                        const TrackerConfig& cfg);

// Folds associate_frame over all frames. When every detection already
// carries a track id the association is bypassed and ids are adopted
// verbatim (pass-through mode).
TrackedScenario run_tracking(const Scenario& s, const TrackerConfig& cfg);

std::string serialize_tracks_json(const std::vector<Track>& tracks);

}  // namespace railcom
