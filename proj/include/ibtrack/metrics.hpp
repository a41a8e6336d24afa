#pragma once

// Tracking and detection metrics: CLEAR-style per-frame matching feeding MOTA and
// MOTP (overlap form, higher is better), identity metrics under a globally optimal
// identity pairing (IDP, IDR, IDF1), mostly-tracked count, AP / mAP@0.5 and FPS.

#include <algorithm>
#include <array>
#include <concepts>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ibtrack/formats.hpp"
#include "ibtrack/geometry.hpp"
#include "ibtrack/hungarian.hpp"

namespace ibtrack {

class MetricError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class EmptyGroundTruth : public MetricError
{
public:
  EmptyGroundTruth() : MetricError("ground truth is empty") {}
};

class NoMatches : public MetricError
{
public:
  NoMatches() : MetricError("no matched boxes") {}
};

class FrameRangeMismatch : public MetricError
{
public:
  FrameRangeMismatch(int frame, int last_frame)
    : MetricError("hypothesis frame " + std::to_string(frame) +
                  " lies outside the ground-truth range 1.." + std::to_string(last_frame))
  {
  }
};

class EmptyInput : public MetricError
{
public:
  EmptyInput() : MetricError("no measurements") {}
};

/// Any record with a frame, an identity and a box (GtRecord, TrackRecord).
template <typename R>
concept IdentifiedBox = requires(const R& r) {
  { r.frame } -> std::convertible_to<int>;
  { r.track_id } -> std::convertible_to<int>;
  { r.bbox } -> std::convertible_to<BBox>;
};

struct MotCounts
{
  long fn_total = 0;
  long fp_total = 0;
  long idsw_total = 0;
  long gt_total = 0;
  double overlap_sum = 0.0;  // sum of IOU over all matches
  long match_total = 0;
};

struct IdCounts
{
  long idtp = 0;
  long idfp = 0;
  long idfn = 0;
};

struct IdMetrics
{
  IdCounts counts;
  double idp = 0.0;
  double idr = 0.0;
  double idf1 = 0.0;
};

/// Frames in which a ground-truth identity appears and in which it was matched.
struct Coverage
{
  int present = 0;
  int matched = 0;
};

struct ClearResult
{
  MotCounts counts;
  std::map<int, Coverage> per_identity;
};

namespace detail {

template <typename R>
std::map<int, std::vector<std::size_t>> index_by_frame(const std::vector<R>& recs)
{
  std::map<int, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    out[recs[i].frame].push_back(i);
  }
  return out;
}

template <typename G, typename H>
int check_frame_range(const std::vector<G>& gt, const std::vector<H>& hyp,
                      std::optional<int> last_frame)
{
  int last = 0;
  if (last_frame) {
    last = *last_frame;
  } else {
    for (const auto& g : gt) {
      last = std::max(last, g.frame);
    }
  }
  for (const auto& h : hyp) {
    if (h.frame < 1 || h.frame > last) {
      throw FrameRangeMismatch(h.frame, last);
    }
  }
  return last;
}

}  // namespace detail

/// Per-frame CLEAR matching. Matches from the previous frame are kept while their
/// IOU stays >= match_iou; the rest are assigned by Hungarian on 1 - IOU restricted
/// to pairs with IOU >= match_iou. An identity switch is counted when a ground-truth
/// identity is matched to a hypothesis id other than its most recent one.
///
/// `last_frame` bounds the sequence; it defaults to the last ground-truth frame.
/// Throws FrameRangeMismatch for hypotheses outside 1..last_frame.
template <IdentifiedBox G, IdentifiedBox H>
ClearResult clear_match_detail(const std::vector<G>& gt, const std::vector<H>& hyp,
                               double match_iou, std::optional<int> last_frame = std::nullopt)
{
  detail::check_frame_range(gt, hyp, last_frame);
  const auto gt_frames = detail::index_by_frame(gt);
  const auto hyp_frames = detail::index_by_frame(hyp);

  ClearResult res;
  std::map<int, int> last_match;   // gt id -> most recent hyp id
  std::map<int, int> prev_frame;   // gt id -> hyp id matched in the previous frame
  std::set<int> frames;
  for (const auto& [f, _] : gt_frames) frames.insert(f);
  for (const auto& [f, _] : hyp_frames) frames.insert(f);

  const std::vector<std::size_t> none;
  int prev_f = -1;
  for (const int f : frames) {
    if (f != prev_f + 1) {
      prev_frame.clear();
    }
    prev_f = f;
    const auto& gi = gt_frames.count(f) ? gt_frames.at(f) : none;
    const auto& hi = hyp_frames.count(f) ? hyp_frames.at(f) : none;

    std::vector<char> g_used(gi.size(), 0);
    std::vector<char> h_used(hi.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // local indices

    for (std::size_t a = 0; a < gi.size(); ++a) {
      const auto it = prev_frame.find(gt[gi[a]].track_id);
      if (it == prev_frame.end()) {
        continue;
      }
      for (std::size_t b = 0; b < hi.size(); ++b) {
        if (!h_used[b] && hyp[hi[b]].track_id == it->second &&
            iou(gt[gi[a]].bbox, hyp[hi[b]].bbox) >= match_iou) {
          g_used[a] = h_used[b] = 1;
          pairs.emplace_back(a, b);
          break;
        }
      }
    }

    std::vector<std::size_t> gr;
    std::vector<std::size_t> hr;
    for (std::size_t a = 0; a < gi.size(); ++a) if (!g_used[a]) gr.push_back(a);
    for (std::size_t b = 0; b < hi.size(); ++b) if (!h_used[b]) hr.push_back(b);
    if (!gr.empty() && !hr.empty()) {
      // Forbidden pairs cost more than any full set of allowed ones.
      const double forbidden = static_cast<double>(gr.size() + hr.size() + 1);
      CostMatrix cost(gr.size(), hr.size());
      for (std::size_t a = 0; a < gr.size(); ++a) {
        for (std::size_t b = 0; b < hr.size(); ++b) {
          const double v = iou(gt[gi[gr[a]]].bbox, hyp[hi[hr[b]]].bbox);
          cost(a, b) = v >= match_iou ? 1.0 - v : forbidden;
        }
      }
      for (const auto& [a, b] : hungarian(cost)) {
        if (cost(a, b) < forbidden) {
          pairs.emplace_back(gr[a], hr[b]);
        }
      }
    }

    std::map<int, int> this_frame;
    for (const auto& [a, b] : pairs) {
      const auto& g = gt[gi[a]];
      const auto& h = hyp[hi[b]];
      const auto last = last_match.find(g.track_id);
      if (last != last_match.end() && last->second != h.track_id) {
        ++res.counts.idsw_total;
      }
      last_match[g.track_id] = h.track_id;
      this_frame[g.track_id] = h.track_id;
      res.counts.overlap_sum += iou(g.bbox, h.bbox);
      ++res.per_identity[g.track_id].matched;
    }
    for (const std::size_t a : gi) {
      ++res.per_identity[gt[a].track_id].present;
    }
    res.counts.gt_total += static_cast<long>(gi.size());
    res.counts.match_total += static_cast<long>(pairs.size());
    res.counts.fn_total += static_cast<long>(gi.size() - pairs.size());
    res.counts.fp_total += static_cast<long>(hi.size() - pairs.size());
    prev_frame = std::move(this_frame);
  }
  return res;
}

template <IdentifiedBox G, IdentifiedBox H>
MotCounts clear_match(const std::vector<G>& gt, const std::vector<H>& hyp, double match_iou,
                      std::optional<int> last_frame = std::nullopt)
{
  return clear_match_detail(gt, hyp, match_iou, last_frame).counts;
}

/// 1 - (FN + FP + IDSW) / GT. Not clamped; negative when errors outnumber GT boxes.
inline double mota(const MotCounts& c)
{
  if (c.gt_total <= 0) {
    throw EmptyGroundTruth();
  }
  return 1.0 - static_cast<double>(c.fn_total + c.fp_total + c.idsw_total) /
                 static_cast<double>(c.gt_total);
}

/// Mean IOU over matches.
inline double motp(const MotCounts& c)
{
  if (c.match_total <= 0) {
    throw NoMatches();
  }
  return c.overlap_sum / static_cast<double>(c.match_total);
}

/// Ratios from identity counts; a zero denominator yields 0.
inline IdMetrics id_ratios(const IdCounts& c)
{
  auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
  IdMetrics m;
  m.counts = c;
  const auto tp = static_cast<double>(c.idtp);
  m.idp = ratio(tp, tp + static_cast<double>(c.idfp));
  m.idr = ratio(tp, tp + static_cast<double>(c.idfn));
  m.idf1 = ratio(2.0 * tp, 2.0 * tp + static_cast<double>(c.idfp + c.idfn));
  return m;
}

/// Co-location counts: overlap[g][h] = frames where identities g and h have IOU >= match_iou.
struct IdentityOverlap
{
  std::vector<int> gt_ids;
  std::vector<int> hyp_ids;
  std::vector<std::vector<long>> overlap;  // [gt][hyp]
  long gt_boxes = 0;
  long hyp_boxes = 0;
};

template <IdentifiedBox G, IdentifiedBox H>
IdentityOverlap identity_overlap(const std::vector<G>& gt, const std::vector<H>& hyp,
                                 double match_iou, std::optional<int> last_frame = std::nullopt)
{
  detail::check_frame_range(gt, hyp, last_frame);
  IdentityOverlap io;
  std::map<int, std::size_t> gidx;
  std::map<int, std::size_t> hidx;
  for (const auto& g : gt) gidx.emplace(g.track_id, 0);
  for (const auto& h : hyp) hidx.emplace(h.track_id, 0);
  for (auto& [id, k] : gidx) { k = io.gt_ids.size(); io.gt_ids.push_back(id); }
  for (auto& [id, k] : hidx) { k = io.hyp_ids.size(); io.hyp_ids.push_back(id); }
  io.overlap.assign(io.gt_ids.size(), std::vector<long>(io.hyp_ids.size(), 0));
  io.gt_boxes = static_cast<long>(gt.size());
  io.hyp_boxes = static_cast<long>(hyp.size());

  const auto hyp_frames = detail::index_by_frame(hyp);
  for (const auto& g : gt) {
    const auto it = hyp_frames.find(g.frame);
    if (it == hyp_frames.end()) {
      continue;
    }
    for (const std::size_t b : it->second) {
      if (iou(g.bbox, hyp[b].bbox) >= match_iou) {
        ++io.overlap[gidx.at(g.track_id)][hidx.at(hyp[b].track_id)];
      }
    }
  }
  return io;
}

/// Identity metrics under the one-to-one identity pairing that minimises the number
/// of boxes not co-located, which is the pairing maximising total co-location.
template <IdentifiedBox G, IdentifiedBox H>
IdMetrics id_metrics(const std::vector<G>& gt, const std::vector<H>& hyp, double match_iou,
                     std::optional<int> last_frame = std::nullopt)
{
  const IdentityOverlap io = identity_overlap(gt, hyp, match_iou, last_frame);
  long idtp = 0;
  if (!io.gt_ids.empty() && !io.hyp_ids.empty()) {
    CostMatrix cost(io.gt_ids.size(), io.hyp_ids.size());
    for (std::size_t a = 0; a < io.gt_ids.size(); ++a) {
      for (std::size_t b = 0; b < io.hyp_ids.size(); ++b) {
        cost(a, b) = -static_cast<double>(io.overlap[a][b]);
      }
    }
    for (const auto& [a, b] : hungarian(cost)) {
      idtp += io.overlap[a][b];
    }
  }
  return id_ratios({idtp, io.hyp_boxes - idtp, io.gt_boxes - idtp});
}

inline constexpr double kMostlyTrackedRatio = 0.8;

/// Ground-truth identities matched in at least 80% of the frames they appear in.
inline int mostly_tracked(const ClearResult& r)
{
  int n = 0;
  for (const auto& [id, cov] : r.per_identity) {
    // matched / present >= 0.8, in integers
    if (cov.present > 0 && 5L * cov.matched >= 4L * cov.present) {
      ++n;
    }
  }
  return n;
}

template <IdentifiedBox G, IdentifiedBox H>
int mostly_tracked(const std::vector<G>& gt, const std::vector<H>& hyp, double match_iou,
                   std::optional<int> last_frame = std::nullopt)
{
  return mostly_tracked(clear_match_detail(gt, hyp, match_iou, last_frame));
}

/// Area under the precision envelope (all-point interpolation) for ranked hits.
/// `hits[k]` tells whether the k-th ranked detection is a true positive.
inline double all_point_ap(const std::vector<bool>& hits, long num_gt)
{
  if (num_gt <= 0 || hits.empty()) {
    return 0.0;
  }
  std::vector<double> precision(hits.size());
  std::vector<double> recall(hits.size());
  long tp = 0;
  for (std::size_t k = 0; k < hits.size(); ++k) {
    tp += hits[k] ? 1 : 0;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(num_gt);
  }
  for (std::size_t k = hits.size() - 1; k > 0; --k) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < hits.size(); ++k) {
    if (recall[k] > prev_recall) {
      ap += (recall[k] - prev_recall) * precision[k];
      prev_recall = recall[k];
    }
  }
  return ap;
}

struct ApResult
{
  std::array<std::optional<double>, kNumClasses> ap;  // empty: class has no ground truth
  std::vector<int> skipped_classes;
  std::optional<double> map;  // unweighted mean over classes with ground truth
};

/// AP per class at `iou_threshold`: detections ranked by descending confidence
/// (stable), each taking the unmatched ground-truth box of highest IOU in its frame
/// when that IOU reaches the threshold.
inline ApResult average_precision(const std::vector<DetectionRecord>& dets,
                                  const std::vector<GtRecord>& gt, double iou_threshold = 0.5)
{
  ApResult res;
  double sum = 0.0;
  int counted = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    std::map<int, std::vector<BBox>> gt_by_frame;
    long num_gt = 0;
    for (const auto& g : gt) {
      if (g.class_id == c) {
        gt_by_frame[g.frame].push_back(g.bbox);
        ++num_gt;
      }
    }
    if (num_gt == 0) {
      res.skipped_classes.push_back(c);
      continue;
    }
    std::vector<const DetectionRecord*> ranked;
    for (const auto& d : dets) {
      if (d.class_id == c) {
        ranked.push_back(&d);
      }
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto* a, const auto* b) { return a->confidence > b->confidence; });

    std::map<int, std::vector<char>> taken;
    std::vector<bool> hits;
    hits.reserve(ranked.size());
    for (const auto* d : ranked) {
      const auto it = gt_by_frame.find(d->frame);
      bool tp = false;
      if (it != gt_by_frame.end()) {
        auto& used = taken[d->frame];
        used.resize(it->second.size(), 0);
        double best = -1.0;
        std::size_t best_k = 0;
        for (std::size_t k = 0; k < it->second.size(); ++k) {
          const double v = iou(d->bbox, it->second[k]);
          if (!used[k] && v > best) {
            best = v;
            best_k = k;
          }
        }
        if (best >= iou_threshold) {
          used[best_k] = 1;
          tp = true;
        }
      }
      hits.push_back(tp);
    }
    const double ap = all_point_ap(hits, num_gt);
    res.ap[static_cast<std::size_t>(c)] = ap;
    sum += ap;
    ++counted;
  }
  if (counted > 0) {
    res.map = sum / counted;
  }
  return res;
}

/// Frames per second as the reciprocal of the mean per-frame inference time.
inline double fps(std::span<const double> durations)
{
  if (durations.empty()) {
    throw EmptyInput();
  }
  for (double d : durations) {
    if (!(d > 0.0)) {
      throw std::invalid_argument("durations must be positive");
    }
  }
  const double mean = std::accumulate(durations.begin(), durations.end(), 0.0) /
                      static_cast<double>(durations.size());
  return 1.0 / mean;
}

}  // namespace ibtrack
