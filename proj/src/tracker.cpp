#include "railcom/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace railcom {

double iou(const Detection& a, const Detection& b) {
  const double ix1 = std::max(a.x1, b.x1);
  const double iy1 = std::max(a.y1, b.y1);
  const double ix2 = std::min(a.x2, b.x2);
  const double iy2 = std::min(a.y2, b.y2);
  const double iw = ix2 - ix1;
  const double ih = iy2 - iy1;
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

bool recover_lost_track(const Detection& candidate, std::int64_t frame_index, const Track& lost,
                        const TrackerConfig& cfg) {
  if (lost.status != TrackStatus::lost) return false;
  if (candidate.class_name != lost.class_name) return false;
  if (frame_index - lost.last_seen_frame > cfg.delta_tol) return false;
  const Point c = candidate.center();
  const double dist = std::hypot(c.x - lost.last_center.x, c.y - lost.last_center.y);
  const double theta = std::max(2.0 * candidate.width(), cfg.lambda_min);
  return dist < theta;
}

namespace {

void observe(Track& t, std::int64_t frame, const Detection& d) {
  const Point c = d.center();
  if (!t.history.empty()) {
    const auto& [pf, pd] = t.history.back();
    const double gap = static_cast<double>(frame - pf);
    const Point pc = pd.center();
    t.last_velocity = Vec2{(c.x - pc.x) / gap, (c.y - pc.y) / gap};
  }
  t.history.emplace_back(frame, d);
  t.status = TrackStatus::active;
  t.last_seen_frame = frame;
  t.last_center = c;
  t.last_width = d.width();
}

struct Pair {
  double score;  // IoU
  std::size_t det;
  std::size_t track;  // index into state.tracks
  std::int64_t track_id;
};

// Greedy descending-IoU matching with (det index, track id) tie-break.
void greedy_match(const FrameRecord& frame, TrackerState& state,
                  const std::vector<std::size_t>& det_pool,
                  std::vector<std::size_t>& track_pool, const TrackerConfig& cfg,
                  std::vector<bool>& det_done, std::vector<Assignment>& out) {
  std::vector<Pair> pairs;
  for (std::size_t di : det_pool)
    for (std::size_t ti : track_pool) {
      const double v = iou(frame.detections[di], state.tracks[ti].history.back().second);
      if (v >= cfg.iou_min) pairs.push_back({v, di, ti, state.tracks[ti].track_id});
    }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.det != b.det) return a.det < b.det;
    return a.track_id < b.track_id;
  });
  std::vector<bool> track_done(state.tracks.size(), false);
  for (const auto& p : pairs) {
    if (det_done[p.det] || track_done[p.track]) continue;
    det_done[p.det] = true;
    track_done[p.track] = true;
    observe(state.tracks[p.track], frame.frame_index, frame.detections[p.det]);
    out.push_back({p.det, p.track_id, AssignmentOrigin::matched});
  }
  std::erase_if(track_pool, [&](std::size_t ti) { return track_done[ti]; });
}

}  // namespace

std::vector<Assignment> associate_frame(TrackerState& state, const FrameRecord& frame,
                                        const TrackerConfig& cfg) {
  if (frame.frame_index <= state.current_frame)
    throw std::invalid_argument("non-monotone frame index " + std::to_string(frame.frame_index));
  const std::int64_t t = frame.frame_index;
  state.current_frame = t;

  // Age out the lost buffer before recovery is offered.
  for (auto& tr : state.tracks)
    if (tr.status == TrackStatus::lost && t - tr.last_seen_frame > cfg.delta_tol)
      tr.status = TrackStatus::terminated;

  std::vector<Assignment> out;
  std::vector<bool> det_done(frame.detections.size(), false);

  std::vector<std::size_t> active_pool;
  for (std::size_t ti = 0; ti < state.tracks.size(); ++ti)
    if (state.tracks[ti].status == TrackStatus::active) active_pool.push_back(ti);

  std::vector<std::size_t> high, rest;
  for (std::size_t di = 0; di < frame.detections.size(); ++di)
    (frame.detections[di].score >= cfg.score_high ? high : rest).push_back(di);

  greedy_match(frame, state, high, active_pool, cfg, det_done, out);
  std::vector<std::size_t> remaining;
  for (std::size_t di = 0; di < frame.detections.size(); ++di)
    if (!det_done[di]) remaining.push_back(di);
  greedy_match(frame, state, remaining, active_pool, cfg, det_done, out);

  // Offer still-unmatched detections to the lost buffer; closest first,
  // lower track id on ties.
  for (std::size_t di = 0; di < frame.detections.size(); ++di) {
    if (det_done[di]) continue;
    const Detection& d = frame.detections[di];
    const Point c = d.center();
    Track* best = nullptr;
    double best_dist = 0.0;
    for (auto& tr : state.tracks) {
      if (!recover_lost_track(d, t, tr, cfg)) continue;
      const double dist = std::hypot(c.x - tr.last_center.x, c.y - tr.last_center.y);
      if (!best || dist < best_dist || (dist == best_dist && tr.track_id < best->track_id)) {
        best = &tr;
        best_dist = dist;
      }
    }
    if (best) {
      observe(*best, t, d);
      det_done[di] = true;
      out.push_back({di, best->track_id, AssignmentOrigin::recovered});
    }
  }

  // Spawn new identities for confident leftovers, in detection order.
  for (std::size_t di = 0; di < frame.detections.size(); ++di) {
    if (det_done[di] || frame.detections[di].score < cfg.score_high) continue;
    Track tr;
    tr.track_id = state.next_id++;
    tr.class_name = frame.detections[di].class_name;
    observe(tr, t, frame.detections[di]);
    state.tracks.push_back(std::move(tr));
    out.push_back({di, state.tracks.back().track_id, AssignmentOrigin::fresh});
  }

  for (auto& tr : state.tracks) {
    if (tr.status == TrackStatus::active && tr.last_seen_frame < t) {
      tr.status = TrackStatus::lost;
      tr.lost_spans.emplace_back(t, t);
    } else if (tr.status == TrackStatus::lost) {
      tr.lost_spans.back().second = t;
    }
  }

  std::sort(out.begin(), out.end(),
            [](const Assignment& a, const Assignment& b) { return a.detection_index < b.detection_index; });
  return out;
}

namespace {

TrackedScenario run_passthrough(const Scenario& s, const TrackerConfig& cfg) {
  TrackedScenario out;
  out.scenario = s;
  std::map<std::int64_t, std::size_t> by_id;
  for (const auto& f : s.frames) {
    std::vector<Assignment> assigns;
    for (std::size_t di = 0; di < f.detections.size(); ++di) {
      const Detection& d = f.detections[di];
      auto it = by_id.find(*d.track_id);
      if (it == by_id.end()) {
        Track tr;
        tr.track_id = *d.track_id;
        tr.class_name = d.class_name;
        observe(tr, f.frame_index, d);
        by_id.emplace(tr.track_id, out.tracks.size());
        out.tracks.push_back(std::move(tr));
        assigns.push_back({di, *d.track_id, AssignmentOrigin::fresh});
      } else {
        observe(out.tracks[it->second], f.frame_index, d);
        assigns.push_back({di, *d.track_id, AssignmentOrigin::matched});
      }
    }
    out.assignments.push_back(std::move(assigns));
  }
  // Derive lost spans from observation gaps, capped at the buffer tolerance.
  const std::int64_t last_frame = s.frames.empty() ? 0 : s.frames.back().frame_index;
  for (auto& tr : out.tracks) {
    for (std::size_t i = 1; i < tr.history.size(); ++i) {
      const std::int64_t a = tr.history[i - 1].first + 1;
      const std::int64_t b = tr.history[i].first - 1;
      if (a <= b) tr.lost_spans.emplace_back(a, std::min(b, a - 1 + cfg.delta_tol));
    }
    if (tr.last_seen_frame < last_frame) {
      const std::int64_t a = tr.last_seen_frame + 1;
      const std::int64_t b = std::min(last_frame, tr.last_seen_frame + cfg.delta_tol);
      tr.lost_spans.emplace_back(a, b);
      tr.status = last_frame - tr.last_seen_frame > cfg.delta_tol ? TrackStatus::terminated
                                                                  : TrackStatus::lost;
    }
  }
  return out;
}

}  // namespace

TrackedScenario run_tracking(const Scenario& s, const TrackerConfig& cfg) {
  if (!validate_scenario(s).ok())
    throw std::invalid_argument("scenario fails validation; run validate first");

  bool all_ided = true;
  for (const auto& f : s.frames)
    for (const auto& d : f.detections)
      if (!d.track_id) all_ided = false;
  bool any_det = false;
  for (const auto& f : s.frames) any_det = any_det || !f.detections.empty();
  if (all_ided && any_det) return run_passthrough(s, cfg);

  TrackedScenario out;
  out.scenario = s;
  TrackerState state;
  for (auto& f : out.scenario.frames) {
    auto assigns = associate_frame(state, f, cfg);
    for (const auto& a : assigns) f.detections[a.detection_index].track_id = a.track_id;
    out.assignments.push_back(std::move(assigns));
  }
  out.tracks = std::move(state.tracks);
  return out;
}

std::string serialize_tracks_json(const std::vector<Track>& tracks) {
  nlohmann::json j;
  j["tracks"] = nlohmann::json::array();
  for (const auto& t : tracks) {
    nlohmann::json tj;
    tj["id"] = t.track_id;
    tj["class"] = t.class_name;
    tj["first"] = t.history.empty() ? 0 : t.history.front().first;
    tj["last"] = t.last_seen_frame;
    tj["lost_spans"] = nlohmann::json::array();
    for (const auto& [a, b] : t.lost_spans) tj["lost_spans"].push_back({a, b});
    j["tracks"].push_back(std::move(tj));
  }
  return j.dump(2);
}

}  // namespace railcom
