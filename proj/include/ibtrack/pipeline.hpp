#pragma once

// Runs one tracker instance per class over a detection stream, frame by frame.

#include <algorithm>
#include <array>
#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ibtrack/config.hpp"
#include "ibtrack/formats.hpp"
#include "ibtrack/ibta.hpp"
#include "ibtrack/trackers.hpp"

namespace ibtrack {

enum class TrackerKind { ibta, sort, cta };

inline std::string_view to_string(TrackerKind k)
{
  switch (k) {
    case TrackerKind::ibta: return "ibta";
    case TrackerKind::sort: return "sort";
    case TrackerKind::cta: return "cta";
  }
  return "ibta";
}

inline TrackerKind parse_tracker_kind(std::string_view s)
{
  if (s == "ibta") return TrackerKind::ibta;
  if (s == "sort") return TrackerKind::sort;
  if (s == "cta") return TrackerKind::cta;
  throw std::invalid_argument("unknown tracker '" + std::string(s) + "'");
}

template <typename T>
concept FrameTracker = requires(T t, int frame, std::span<const BBox> dets) {
  { t.step(frame, dets) } -> std::same_as<std::vector<TrackRecord>>;
};

/// Detections bucketed by frame and class, frame 1..last_frame.
struct FrameTable
{
  int last_frame = 0;
  // boxes[frame - 1][class]
  std::vector<std::array<std::vector<BBox>, kNumClasses>> boxes;

  static FrameTable build(const std::vector<DetectionRecord>& dets,
                          std::optional<int> last_frame = std::nullopt)
  {
    FrameTable t;
    int last = 0;
    for (const auto& d : dets) {
      last = std::max(last, d.frame);
    }
    t.last_frame = last_frame ? std::max(*last_frame, last) : last;
    t.boxes.resize(static_cast<std::size_t>(t.last_frame));
    for (const auto& d : dets) {
      t.boxes[static_cast<std::size_t>(d.frame - 1)][static_cast<std::size_t>(d.class_id)]
        .push_back(d.bbox);
    }
    return t;
  }
};

/// Per-frame wall time of the tracker step calls, in seconds.
using StepTimes = std::vector<double>;

template <FrameTracker Tracker>
std::vector<TrackRecord> run_per_class(const FrameTable& table, const TrackerConfig& cfg,
                                       StepTimes* times = nullptr)
{
  std::vector<Tracker> trackers;
  for (int c = 0; c < kNumClasses; ++c) {
    trackers.emplace_back(c, cfg);
  }
  std::vector<TrackRecord> out;
  if (times) {
    times->clear();
    times->reserve(table.boxes.size());
  }
  for (int frame = 1; frame <= table.last_frame; ++frame) {
    const auto& per_class = table.boxes[static_cast<std::size_t>(frame - 1)];
    const auto start = std::chrono::steady_clock::now();
    std::array<std::vector<TrackRecord>, kNumClasses> recs;
    for (std::size_t c = 0; c < trackers.size(); ++c) {
      recs[c] = trackers[c].step(frame, per_class[c]);
    }
    const auto stop = std::chrono::steady_clock::now();
    if (times) {
      times->push_back(std::chrono::duration<double>(stop - start).count());
    }
    for (auto& r : recs) {
      out.insert(out.end(), r.begin(), r.end());
    }
  }
  return out;
}

inline std::vector<TrackRecord> run_tracker(TrackerKind kind, const FrameTable& table,
                                            const TrackerConfig& cfg, StepTimes* times = nullptr)
{
  switch (kind) {
    case TrackerKind::ibta: return run_per_class<IbtaTracker>(table, cfg, times);
    case TrackerKind::sort: return run_per_class<SortTracker>(table, cfg, times);
    case TrackerKind::cta: return run_per_class<CentroidTracker>(table, cfg, times);
  }
  return {};
}

inline std::vector<TrackRecord> run_tracker(TrackerKind kind,
                                            const std::vector<DetectionRecord>& dets,
                                            const TrackerConfig& cfg)
{
  return run_tracker(kind, FrameTable::build(dets), cfg);
}

}  // namespace ibtrack
