#pragma once

// Baseline trackers: nearest-centroid (CTA) and SORT (Kalman + Hungarian IOU).
// One instance tracks one class of one sequence.

#include <algorithm>
#include <cstddef>
#include <span>
#include <tuple>
#include <vector>

#include "ibtrack/config.hpp"
#include "ibtrack/geometry.hpp"
#include "ibtrack/hungarian.hpp"
#include "ibtrack/kalman.hpp"
#include "ibtrack/track.hpp"

namespace ibtrack {

class CentroidTracker
{
public:
  CentroidTracker(int class_id, TrackerConfig cfg) : cfg_(std::move(cfg)), book_(class_id) {}

  /// Centre-distance gate between a track box and a detection box.
  double gate_distance(const BBox& track_box, const BBox& det) const
  {
    return cfg_.v_max + std::max(diagonal(track_box), diagonal(det)) / 2.0;
  }

  std::vector<TrackRecord> step(int frame, std::span<const BBox> dets)
  {
    struct Candidate
    {
      double dist;
      std::size_t track;
      std::size_t det;
    };
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
      const Point tc = center(tracks_[i].bbox);
      for (std::size_t j = 0; j < dets.size(); ++j) {
        const double d = distance(tc, center(dets[j]));
        if (d <= gate_distance(tracks_[i].bbox, dets[j])) {
          cands.push_back({d, i, j});
        }
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      return std::tie(a.dist, a.track, a.det) < std::tie(b.dist, b.track, b.det);
    });

    std::vector<char> track_used(tracks_.size(), 0);
    std::vector<char> det_used(dets.size(), 0);
    for (const auto& c : cands) {
      if (track_used[c.track] || det_used[c.det]) {
        continue;
      }
      track_used[c.track] = det_used[c.det] = 1;
      Track& t = tracks_[c.track];
      t.bbox = dets[c.det];
      t.time_since_update = 0;
      ++t.hits;
      t.last_frame = frame;
      refresh_phase(t, cfg_);
    }
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
      if (!track_used[i]) {
        age_unmatched(tracks_[i], cfg_);
      }
    }
    for (std::size_t j = 0; j < dets.size(); ++j) {
      if (!det_used[j]) {
        Track t = book_.open(frame, dets[j]);
        refresh_phase(t, cfg_);
        tracks_.push_back(std::move(t));
      }
    }
    return emit_and_prune(frame);
  }

  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerConfig& config() const { return cfg_; }

private:
  std::vector<TrackRecord> emit_and_prune(int frame)
  {
    std::vector<TrackRecord> out;
    for (const Track& t : tracks_) {
      if (t.status == TrackPhase::confirmed && t.time_since_update == 0) {
        out.push_back(make_record(frame, t, TrackStatus::matched));
      }
    }
    std::erase_if(tracks_, [](const Track& t) { return t.status == TrackPhase::dead; });
    return out;
  }

  TrackerConfig cfg_;
  TrackBook book_;
  std::vector<Track> tracks_;
};

class SortTracker
{
public:
  SortTracker(int class_id, TrackerConfig cfg) : cfg_(std::move(cfg)), book_(class_id) {}

  std::vector<TrackRecord> step(int frame, std::span<const BBox> dets)
  {
    std::vector<BBox> predicted;
    predicted.reserve(tracks_.size());
    for (Track& t : tracks_) {
      t.kstate = kf_predict(*t.kstate, cfg_.kalman);
      predicted.push_back(state_to_box(t.kstate->mean));
    }

    std::vector<char> track_used(tracks_.size(), 0);
    std::vector<char> det_used(dets.size(), 0);
    if (!tracks_.empty() && !dets.empty()) {
      CostMatrix cost(tracks_.size(), dets.size());
      for (std::size_t i = 0; i < tracks_.size(); ++i) {
        for (std::size_t j = 0; j < dets.size(); ++j) {
          cost(i, j) = 1.0 - iou(predicted[i], dets[j]);
        }
      }
      for (const auto& [i, j] : hungarian(cost)) {
        if (1.0 - cost(i, j) < cfg_.iou_threshold) {
          continue;
        }
        track_used[i] = det_used[j] = 1;
        Track& t = tracks_[i];
        t.kstate = kf_update(*t.kstate, dets[j], cfg_.kalman);
        t.bbox = state_to_box(t.kstate->mean);
        t.time_since_update = 0;
        ++t.hits;
        t.last_frame = frame;
        refresh_phase(t, cfg_);
      }
    }
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
      if (!track_used[i]) {
        tracks_[i].bbox = predicted[i];
        age_unmatched(tracks_[i], cfg_);
      }
    }
    for (std::size_t j = 0; j < dets.size(); ++j) {
      if (!det_used[j]) {
        Track t = book_.open(frame, dets[j]);
        t.kstate = kf_init(dets[j], cfg_.kalman);
        refresh_phase(t, cfg_);
        tracks_.push_back(std::move(t));
      }
    }

    std::vector<TrackRecord> out;
    for (const Track& t : tracks_) {
      if (t.status == TrackPhase::confirmed && t.time_since_update == 0) {
        out.push_back(make_record(frame, t, TrackStatus::matched));
      }
    }
    std::erase_if(tracks_, [](const Track& t) { return t.status == TrackPhase::dead; });
    return out;
  }

  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerConfig& config() const { return cfg_; }

private:
  TrackerConfig cfg_;
  TrackBook book_;
  std::vector<Track> tracks_;
};

}  // namespace ibtrack
