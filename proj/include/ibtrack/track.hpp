#pragma once

#include <optional>
#include <vector>

#include "ibtrack/config.hpp"
#include "ibtrack/formats.hpp"
#include "ibtrack/geometry.hpp"
#include "ibtrack/kalman.hpp"

namespace ibtrack {

/// Position of an object relative to its overlapping neighbour in one frame.
/// `larger` marks the bigger member of a pair; the smaller member is scored by
/// where its centre falls across the bigger box's horizontal thirds.
enum class Location : int { larger = 0, left = 1, central = 2, right = 3 };

/// Empty when the object has no adjacent neighbour.
using LocationScore = std::optional<Location>;

inline bool is_smaller_member(const LocationScore& s)
{
  return s.has_value() && *s != Location::larger;
}

enum class TrackPhase { tentative, confirmed, dead };

struct Track
{
  int id = 1;
  int class_id = 0;
  BBox bbox{0, 0, 1, 1};
  std::optional<KalmanState> kstate;  // SORT only
  int hits = 0;
  int time_since_update = 0;
  LocationScore location_score;
  std::optional<int> partner_id;  // larger neighbour this track is paired with
  TrackPhase status = TrackPhase::tentative;
  int inferred_streak = 0;  // frames sustained by inference since the last observation
  int last_frame = 0;       // last frame the track was matched or inferred
  int death_frame = 0;      // frame at which the track was declared dead
};

inline TrackRecord make_record(int frame, const Track& t, TrackStatus status)
{
  return {frame, t.id, t.class_id, t.bbox, status};
}

/// Shared lifecycle bookkeeping: id allocation and aging.
class TrackBook
{
public:
  explicit TrackBook(int class_id) : class_id_(class_id) {}

  int class_id() const { return class_id_; }

  Track open(int frame, const BBox& box)
  {
    Track t;
    t.id = next_id_++;
    t.class_id = class_id_;
    t.bbox = box;
    t.hits = 1;
    t.time_since_update = 0;
    t.last_frame = frame;
    return t;
  }

  int next_id() const { return next_id_; }

private:
  int class_id_;
  int next_id_ = 1;
};

inline void refresh_phase(Track& t, const TrackerConfig& cfg)
{
  if (t.status == TrackPhase::tentative && t.hits >= cfg.min_hits) {
    t.status = TrackPhase::confirmed;
  }
}

/// Ages an unmatched track; marks it dead once it exceeds max_age.
inline void age_unmatched(Track& t, const TrackerConfig& cfg)
{
  ++t.time_since_update;
  if (t.time_since_update > cfg.max_age) {
    t.status = TrackPhase::dead;
  }
}

}  // namespace ibtrack
