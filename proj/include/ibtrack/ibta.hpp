#pragma once

// Information-based tracker: no motion filter. Positions are predicted from the
// preset camera velocity, gated by a buffer disk whose radius is the gap between
// the maximum and the average speed, and objects that overlap in one frame are
// paired so a hidden smaller member can be carried by its visible larger partner.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "ibtrack/config.hpp"
#include "ibtrack/geometry.hpp"
#include "ibtrack/track.hpp"

namespace ibtrack {

/// Horizontal third of `larger` containing the centre of `smaller`. Centres on
/// either boundary count as central.
inline Location relative_location(const BBox& larger, const BBox& smaller)
{
  const double cx = center(smaller).cx;
  const double third = larger.width() / 3.0;
  if (cx < larger.x_min() + third) {
    return Location::left;
  }
  if (cx > larger.x_min() + 2.0 * third) {
    return Location::right;
  }
  return Location::central;
}

struct NeighborPairing
{
  std::vector<LocationScore> scores;
  /// For smaller members, index of the larger partner box.
  std::vector<std::optional<std::size_t>> partner;
};

/// Pairs overlapping boxes (iou strictly above `neighbor_iou_threshold`).
///
/// Boxes are visited from largest to smallest area (ties: input order). A box with
/// at least one already-visited neighbour becomes the smaller member of a pair with
/// the visited neighbour of greatest IOU, scored by relative_location. A box whose
/// neighbours are all smaller is scored `larger`; a box with no neighbour gets none.
inline NeighborPairing pair_neighbors(std::span<const BBox> boxes, double neighbor_iou_threshold)
{
  const std::size_t n = boxes.size();
  NeighborPairing out{std::vector<LocationScore>(n), std::vector<std::optional<std::size_t>>(n)};

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    order[i] = i;
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return area(boxes[a]) > area(boxes[b]);
  });

  std::vector<std::size_t> rank(n);
  for (std::size_t k = 0; k < n; ++k) {
    rank[order[k]] = k;
  }

  std::vector<char> has_neighbor(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t cur = order[k];
    double best_iou = -1.0;
    for (std::size_t prev = 0; prev < n; ++prev) {
      if (prev == cur) {
        continue;
      }
      const double v = iou(boxes[cur], boxes[prev]);
      if (v <= neighbor_iou_threshold) {
        continue;
      }
      has_neighbor[cur] = 1;
      // Only boxes visited earlier (larger, or equal and earlier) can be partners.
      if (rank[prev] < k && v > best_iou) {
        best_iou = v;
        out.partner[cur] = prev;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (out.partner[i]) {
      out.scores[i] = relative_location(boxes[*out.partner[i]], boxes[i]);
    } else if (has_neighbor[i]) {
      out.scores[i] = Location::larger;
    }
  }
  return out;
}

inline std::vector<LocationScore> assign_location_scores(std::span<const BBox> boxes,
                                                         double neighbor_iou_threshold)
{
  return pair_neighbors(boxes, neighbor_iou_threshold).scores;
}

struct PredictedPosition
{
  BBox raw_box;
  Point buffer_center;
  double buffer_radius = 0.0;
};

/// Position after `steps` frames at the preset speed; the buffer grows linearly.
inline PredictedPosition predict_position(const BBox& box, int steps, const TrackerConfig& cfg)
{
  const Point dir = axis_direction(cfg.motion_axis);
  const double shift = cfg.v_avg * steps;
  const BBox raw = translate(box, dir.cx * shift, dir.cy * shift);
  return {raw, center(raw), (cfg.v_max - cfg.v_avg) * steps};
}

/// A track unmatched for k consecutive frames is projected k + 1 frames ahead.
inline PredictedPosition predict_position(const Track& t, const TrackerConfig& cfg)
{
  return predict_position(t.bbox, t.time_since_update + 1, cfg);
}

/// IOU with the raw prediction must reach the match threshold and the detection's
/// centre must fall inside the buffer widened by half the detection's diagonal.
inline bool gate(const PredictedPosition& pred, const BBox& det, const TrackerConfig& cfg)
{
  if (iou(pred.raw_box, det) < cfg.iou_threshold) {
    return false;
  }
  return distance(center(det), pred.buffer_center) <= pred.buffer_radius + diagonal(det) / 2.0;
}

class IbtaTracker
{
public:
  IbtaTracker(int class_id, TrackerConfig cfg) : cfg_(std::move(cfg)), book_(class_id) {}

  std::vector<TrackRecord> step(int frame, std::span<const BBox> dets)
  {
    const NeighborPairing pairing = pair_neighbors(dets, cfg_.neighbor_iou_threshold);

    std::vector<std::optional<std::size_t>> det_track(dets.size());  // det -> live track
    std::vector<char> track_matched(tracks_.size(), 0);
    std::vector<Point> displacement(tracks_.size(), Point{});

    // Greedy matching of live tracks against current detections.
    const auto matches =
      greedy_match(tracks_, dets, pairing.scores, [](std::size_t) { return true; });
    for (const auto& [i, j] : matches) {
      Track& t = tracks_[i];
      const Point before = center(t.bbox);
      const Point after = center(dets[j]);
      displacement[i] = {after.cx - before.cx, after.cy - before.cy};
      track_matched[i] = 1;
      det_track[j] = i;
      mark_observed(t, frame, dets[j], pairing.scores[j]);
    }

    // Unmatched tracks: occlusion inference for smaller members of a matched pair.
    std::map<int, std::size_t> index_of;
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
      index_of.emplace(tracks_[i].id, i);
    }
    std::vector<char> inferred(tracks_.size(), 0);
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
      if (track_matched[i]) {
        continue;
      }
      Track& t = tracks_[i];
      std::optional<std::size_t> partner;
      if (is_smaller_member(t.location_score) && t.partner_id) {
        if (auto it = index_of.find(*t.partner_id); it != index_of.end() && track_matched[it->second]) {
          partner = it->second;
        }
      }
      if (partner && t.inferred_streak < cfg_.max_age) {
        const Point d = displacement[*partner];
        const BBox moved = translate(t.bbox, d.cx, d.cy);
        if (inside_frame(moved)) {
          t.bbox = moved;
          ++t.inferred_streak;
          t.last_frame = frame;
          inferred[i] = 1;
          continue;
        }
      }
      age_unmatched(t, cfg_);
    }

    // Unmatched detections: larger, isolated, or smaller with a matched partner may
    // revive a recently dead track; everything else opens a new track.
    std::vector<char> det_matched_live(dets.size(), 0);
    for (std::size_t j = 0; j < dets.size(); ++j) {
      det_matched_live[j] = det_track[j].has_value();
    }
    auto may_reactivate = [&](std::size_t j) {
      if (det_matched_live[j]) {
        return false;
      }
      if (!is_smaller_member(pairing.scores[j])) {
        return true;
      }
      const auto p = pairing.partner[j];
      return p.has_value() && det_matched_live[*p];
    };

    std::vector<std::optional<std::size_t>> det_new(dets.size());  // det -> index in tracks_
    prune_graveyard(frame);
    const auto revived = greedy_match(graveyard_, dets, pairing.scores, may_reactivate);
    std::vector<char> grave_used(graveyard_.size(), 0);
    for (const auto& [g, j] : revived) {
      Track t = graveyard_[g];
      grave_used[g] = 1;
      t.status = TrackPhase::tentative;
      mark_observed(t, frame, dets[j], pairing.scores[j]);
      det_new[j] = tracks_.size();
      tracks_.push_back(std::move(t));
      inferred.push_back(0);
    }
    for (std::size_t j = 0; j < dets.size(); ++j) {
      if (det_matched_live[j] || det_new[j]) {
        continue;
      }
      Track t = book_.open(frame, dets[j]);
      t.location_score = pairing.scores[j];
      refresh_phase(t, cfg_);
      det_new[j] = tracks_.size();
      tracks_.push_back(std::move(t));
      inferred.push_back(0);
    }
    {
      std::vector<Track> keep;
      for (std::size_t g = 0; g < graveyard_.size(); ++g) {
        if (!grave_used[g]) {
          keep.push_back(std::move(graveyard_[g]));
        }
      }
      graveyard_ = std::move(keep);
    }

    // Partner links follow this frame's pairing for every observed track.
    std::vector<std::optional<int>> det_id(dets.size());
    for (std::size_t j = 0; j < dets.size(); ++j) {
      if (det_track[j]) {
        det_id[j] = tracks_[*det_track[j]].id;
      } else if (det_new[j]) {
        det_id[j] = tracks_[*det_new[j]].id;
      }
    }
    for (std::size_t j = 0; j < dets.size(); ++j) {
      const std::size_t ti = det_track[j] ? *det_track[j] : *det_new[j];
      Track& t = tracks_[ti];
      const auto p = pairing.partner[j];
      t.partner_id = p ? det_id[*p] : std::nullopt;
    }

    std::vector<TrackRecord> out;
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
      const Track& t = tracks_[i];
      if (t.status != TrackPhase::confirmed) {
        continue;
      }
      if (inferred[i]) {
        out.push_back(make_record(frame, t, TrackStatus::inferred));
      } else if (t.time_since_update == 0 && t.last_frame == frame) {
        out.push_back(make_record(frame, t, TrackStatus::matched));
      }
    }
    std::sort(out.begin(), out.end(),
              [](const TrackRecord& a, const TrackRecord& b) { return a.track_id < b.track_id; });

    for (Track& t : tracks_) {
      if (t.status == TrackPhase::dead) {
        t.death_frame = frame;
        graveyard_.push_back(std::move(t));
      }
    }
    std::erase_if(tracks_, [](const Track& t) { return t.status == TrackPhase::dead; });
    return out;
  }

  const std::vector<Track>& tracks() const { return tracks_; }
  const std::vector<Track>& graveyard() const { return graveyard_; }
  const TrackerConfig& config() const { return cfg_; }

private:
  struct Candidate
  {
    double overlap;
    bool agree;
    std::size_t track;
    std::size_t det;
  };

  static constexpr double kTieTolerance = 1e-6;

  /// Gated greedy matching in descending IOU. Within a run of candidates whose IOU
  /// lies within kTieTolerance of the run's head, pairs whose location scores agree
  /// go first.
  template <typename DetFilter>
  std::vector<std::pair<std::size_t, std::size_t>> greedy_match(
    const std::vector<Track>& pool, std::span<const BBox> dets,
    const std::vector<LocationScore>& scores, DetFilter&& det_ok) const
  {
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const PredictedPosition pred = predict_position(pool[i], cfg_);
      for (std::size_t j = 0; j < dets.size(); ++j) {
        if (!det_ok(j) || !gate(pred, dets[j], cfg_)) {
          continue;
        }
        cands.push_back({iou(pred.raw_box, dets[j]), pool[i].location_score == scores[j], i, j});
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      if (a.overlap != b.overlap) {
        return a.overlap > b.overlap;
      }
      return std::tie(a.track, a.det) < std::tie(b.track, b.det);
    });
    for (std::size_t head = 0; head < cands.size();) {
      std::size_t end = head + 1;
      while (end < cands.size() && cands[head].overlap - cands[end].overlap <= kTieTolerance) {
        ++end;
      }
      std::stable_partition(cands.begin() + static_cast<std::ptrdiff_t>(head),
                            cands.begin() + static_cast<std::ptrdiff_t>(end),
                            [](const Candidate& c) { return c.agree; });
      head = end;
    }

    std::vector<char> pool_used(pool.size(), 0);
    std::vector<char> det_used(dets.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& c : cands) {
      if (pool_used[c.track] || det_used[c.det]) {
        continue;
      }
      pool_used[c.track] = det_used[c.det] = 1;
      out.emplace_back(c.track, c.det);
    }
    return out;
  }

  void mark_observed(Track& t, int frame, const BBox& det, const LocationScore& score) const
  {
    t.bbox = det;
    t.time_since_update = 0;
    t.inferred_streak = 0;
    ++t.hits;
    t.last_frame = frame;
    t.location_score = score;
    refresh_phase(t, cfg_);
  }

  bool inside_frame(const BBox& b) const
  {
    if (cfg_.frame_width > 0.0 && (b.x_min() < 0.0 || b.x_max() > cfg_.frame_width)) {
      return false;
    }
    if (cfg_.frame_height > 0.0 && (b.y_min() < 0.0 || b.y_max() > cfg_.frame_height)) {
      return false;
    }
    return true;
  }

  /// Dead tracks stay revivable for reactivation_window frames after death; the
  /// ones kept are aged so their prediction covers every missed frame.
  void prune_graveyard(int frame)
  {
    std::erase_if(graveyard_, [&](const Track& t) {
      return frame - t.death_frame > cfg_.reactivation_window;
    });
    for (Track& t : graveyard_) {
      t.time_since_update = frame - t.last_frame - 1;
    }
  }

  TrackerConfig cfg_;
  TrackBook book_;
  std::vector<Track> tracks_;
  std::vector<Track> graveyard_;
};

}  // namespace ibtrack
