#include <gtest/gtest.h>

#include <random>

#include "ibtrack/metrics.hpp"
#include "ibtrack/report.hpp"
#include "oracles.hpp"

using namespace ibtrack;

namespace {

std::vector<GtRecord> straight_track(int id, int frames, double x = 0)
{
  std::vector<GtRecord> out;
  for (int f = 1; f <= frames; ++f) out.push_back({f, id, 0, BBox(x, 10.0 * f, 20, 20)});
  return out;
}

std::vector<TrackRecord> as_hyp(const std::vector<GtRecord>& gt)
{
  std::vector<TrackRecord> out;
  for (const auto& g : gt) out.push_back({g.frame, g.track_id, g.class_id, g.bbox, TrackStatus::matched});
  return out;
}

}  // namespace

TEST(ClearMatch, PerfectHypothesis)
{
  auto gt = straight_track(1, 6);
  const auto more = straight_track(2, 6, 100);
  gt.insert(gt.end(), more.begin(), more.end());
  const MotCounts c = clear_match(gt, as_hyp(gt), 0.5);
  EXPECT_EQ(c.fn_total, 0);
  EXPECT_EQ(c.fp_total, 0);
  EXPECT_EQ(c.idsw_total, 0);
  EXPECT_EQ(c.gt_total, 12);
  EXPECT_EQ(c.match_total, 12);
  EXPECT_EQ(c.overlap_sum, 12.0);
  EXPECT_EQ(mota(c), 1.0);
  EXPECT_EQ(motp(c), 1.0);
}

TEST(ClearMatch, OneMissedBox)
{
  const auto gt = straight_track(1, 10);
  auto hyp = as_hyp(gt);
  hyp.erase(hyp.begin() + 4);
  const MotCounts c = clear_match(gt, hyp, 0.5);
  EXPECT_EQ(c.fn_total, 1);
  EXPECT_EQ(c.fp_total, 0);
  EXPECT_DOUBLE_EQ(mota(c), 0.9);
}

TEST(ClearMatch, SwitchAtFrameSix)
{
  const auto gt = straight_track(1, 10);
  auto hyp = as_hyp(gt);
  for (auto& h : hyp)
    if (h.frame >= 6) h.track_id = 2;
  const MotCounts c = clear_match(gt, hyp, 0.5);
  EXPECT_EQ(c.idsw_total, 1);
  EXPECT_EQ(c.fn_total, 0);
  EXPECT_EQ(c.fp_total, 0);
}

TEST(ClearMatch, SwitchBackAlsoCounts)
{
  const auto gt = straight_track(1, 9);
  auto hyp = as_hyp(gt);
  for (auto& h : hyp)
    if (h.frame >= 4 && h.frame <= 6) h.track_id = 2;
  EXPECT_EQ(clear_match(gt, hyp, 0.5).idsw_total, 2);
}

TEST(ClearMatch, PreviousMatchIsKept)
{
  const std::vector<GtRecord> gt{
    {1, 1, 0, BBox(0, 0, 10, 10)},
    {2, 1, 0, BBox(0, 0, 10, 10)},
    {2, 2, 0, BBox(4, 0, 10, 10)},
  };
  const std::vector<TrackRecord> hyp{
    {1, 1, 0, BBox(0, 0, 10, 10), TrackStatus::matched},
    {2, 1, 0, BBox(3, 0, 10, 10), TrackStatus::matched},  // iou 0.54 with gt 1, 0.82 with gt 2
    {2, 2, 0, BBox(0, 0, 10, 10), TrackStatus::matched},  // iou 1 with gt 1, 0.43 with gt 2
  };
  const MotCounts c = clear_match(gt, hyp, 0.5);
  EXPECT_EQ(c.idsw_total, 0);
  EXPECT_EQ(c.match_total, 2);
  EXPECT_EQ(c.fn_total, 1);
  EXPECT_EQ(c.fp_total, 1);
}

TEST(ClearMatch, FrameRangeMismatch)
{
  const auto gt = straight_track(1, 5);
  auto hyp = as_hyp(gt);
  hyp.push_back({6, 1, 0, BBox(0, 0, 5, 5), TrackStatus::matched});
  EXPECT_THROW(clear_match(gt, hyp, 0.5), FrameRangeMismatch);
  EXPECT_NO_THROW(clear_match(gt, hyp, 0.5, 6));
}

TEST(Mota, HandCounts)
{
  MotCounts c;
  c.gt_total = 10;
  c.fn_total = 1;
  EXPECT_DOUBLE_EQ(mota(c), 0.9);
  c = {};
  c.gt_total = 20;
  c.fn_total = 2;
  c.fp_total = 1;
  c.idsw_total = 1;
  EXPECT_DOUBLE_EQ(mota(c), 0.8);
  c.fp_total = 40;
  EXPECT_LT(mota(c), 0.0);
  EXPECT_THROW(mota(MotCounts{}), EmptyGroundTruth);
}

TEST(Motp, OverlapForm)
{
  MotCounts c;
  c.overlap_sum = 0.5 + 1.0;
  c.match_total = 2;
  EXPECT_EQ(motp(c), 0.75);
  EXPECT_THROW(motp(MotCounts{}), NoMatches);
}

TEST(IdMetrics, HandRatios)
{
  const IdMetrics m = id_ratios({8, 2, 2});
  EXPECT_DOUBLE_EQ(m.idp, 0.8);
  EXPECT_DOUBLE_EQ(m.idr, 0.8);
  EXPECT_DOUBLE_EQ(m.idf1, 0.8);
  const IdMetrics z = id_ratios({0, 0, 0});
  EXPECT_EQ(z.idf1, 0.0);
}

TEST(IdMetrics, PerfectAndSplitTrack)
{
  const auto gt = straight_track(1, 10);
  const IdMetrics perfect = id_metrics(gt, as_hyp(gt), 0.5);
  EXPECT_EQ(perfect.idf1, 1.0);
  auto hyp = as_hyp(gt);
  for (auto& h : hyp)
    if (h.frame >= 9) h.track_id = 2;
  const IdMetrics split = id_metrics(gt, hyp, 0.5);
  EXPECT_EQ(split.counts.idtp, 8);
  EXPECT_EQ(split.counts.idfp, 2);
  EXPECT_EQ(split.counts.idfn, 2);
  EXPECT_DOUBLE_EQ(split.idf1, 0.8);
}

TEST(IdMetrics, MatchesBruteForcePairing)
{
  std::mt19937 rng(21);
  std::uniform_int_distribution<int> nid(1, 4);
  std::uniform_int_distribution<int> lane(0, 5);
  std::uniform_int_distribution<int> coin(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const int frames = 8;
    const int ng = nid(rng);
    const int nh = nid(rng);
    std::vector<GtRecord> gt;
    std::vector<TrackRecord> hyp;
    for (int f = 1; f <= frames; ++f) {
      std::vector<int> gl(6, 0);
      for (int g = 1; g <= ng; ++g) {
        if (coin(rng) == 0) continue;
        int l = lane(rng);
        while (gl[static_cast<std::size_t>(l)]) l = (l + 1) % 6;
        gl[static_cast<std::size_t>(l)] = g;
        gt.push_back({f, g, 0, BBox(50.0 * l, 0, 20, 20)});
      }
      std::vector<int> hl(6, 0);
      for (int h = 1; h <= nh; ++h) {
        if (coin(rng) == 0) continue;
        int l = lane(rng);
        while (hl[static_cast<std::size_t>(l)]) l = (l + 1) % 6;
        hl[static_cast<std::size_t>(l)] = h;
        hyp.push_back({f, h, 0, BBox(50.0 * l + 2, 0, 20, 20), TrackStatus::matched});
      }
    }
    if (gt.empty()) continue;
    // co-location counts by brute force over every record pair
    std::vector<std::vector<long>> overlap(static_cast<std::size_t>(ng), std::vector<long>(static_cast<std::size_t>(nh), 0));
    for (const auto& g : gt)
      for (const auto& h : hyp)
        if (g.frame == h.frame && iou(g.bbox, h.bbox) >= 0.5)
          ++overlap[static_cast<std::size_t>(g.track_id - 1)][static_cast<std::size_t>(h.track_id - 1)];
    const long best = oracle::brute_force_best_pairing(overlap);
    const IdMetrics m = id_metrics(gt, hyp, 0.5, frames);
    ASSERT_EQ(m.counts.idtp, best) << "trial " << trial;
    ASSERT_EQ(m.counts.idtp + m.counts.idfn, static_cast<long>(gt.size()));
    ASSERT_EQ(m.counts.idtp + m.counts.idfp, static_cast<long>(hyp.size()));
  }
}

TEST(MostlyTracked, EightyPercentBoundary)
{
  const auto gt = straight_track(1, 10);
  auto hyp8 = as_hyp(gt);
  hyp8.erase(hyp8.begin() + 8, hyp8.end());
  EXPECT_EQ(mostly_tracked(gt, hyp8, 0.5), 1);
  auto hyp7 = as_hyp(gt);
  hyp7.erase(hyp7.begin() + 7, hyp7.end());
  EXPECT_EQ(mostly_tracked(gt, hyp7, 0.5), 0);

  std::vector<GtRecord> five;
  for (int id = 1; id <= 5; ++id) {
    const auto t = straight_track(id, 4, 100.0 * id);
    five.insert(five.end(), t.begin(), t.end());
  }
  EXPECT_EQ(mostly_tracked(five, as_hyp(five), 0.5), 5);
}

TEST(AveragePrecision, RankedHits)
{
  EXPECT_NEAR(all_point_ap({true, false, true}, 2), 1.0 * 0.5 + (2.0 / 3.0) * 0.5, 1e-12);
  EXPECT_EQ(all_point_ap({true, true}, 2), 1.0);
  EXPECT_EQ(all_point_ap({}, 2), 0.0);
}

TEST(AveragePrecision, FromRecords)
{
  const std::vector<GtRecord> gt{{1, 1, 1, BBox(0, 0, 10, 10)}, {2, 1, 1, BBox(0, 0, 10, 10)}};
  const std::vector<DetectionRecord> dets{
    {1, 1, 0.9, BBox(0, 0, 10, 10)},
    {1, 1, 0.8, BBox(50, 50, 10, 10)},  // nothing there
    {2, 1, 0.7, BBox(1, 0, 10, 10)},
  };
  const ApResult r = average_precision(dets, gt, 0.5);
  ASSERT_TRUE(r.ap[1].has_value());
  EXPECT_NEAR(*r.ap[1], 5.0 / 6.0, 1e-12);
  EXPECT_EQ(r.skipped_classes, (std::vector<int>{0, 2}));
  EXPECT_NEAR(*r.map, 5.0 / 6.0, 1e-12);

  const ApResult none = average_precision({}, gt, 0.5);
  EXPECT_EQ(*none.ap[1], 0.0);

  // a duplicate detection of an already-claimed box is a false positive
  std::vector<DetectionRecord> dup{{1, 1, 0.9, BBox(0, 0, 10, 10)}, {1, 1, 0.8, BBox(0, 0, 10, 10)}};
  EXPECT_EQ(*average_precision(dup, gt, 0.5).ap[1], 0.5);
}

TEST(Fps, ReciprocalOfMean)
{
  EXPECT_EQ(fps(std::vector<double>(5, 1.0)), 1.0);
  EXPECT_NEAR(fps(std::vector<double>(7, 0.01)), 100.0, 1e-9);
  EXPECT_NEAR(fps(std::vector<double>(3, 1.0 / 131.6)), 131.6, 1e-9);
  EXPECT_THROW(fps(std::vector<double>{}), EmptyInput);
  EXPECT_THROW(fps(std::vector<double>{0.1, 0.0}), std::invalid_argument);
}

TEST(Report, SwitchShowsInIdsColumn)
{
  const auto gt = straight_track(1, 10);
  auto hyp = as_hyp(gt);
  for (auto& h : hyp)
    if (h.frame >= 6) h.track_id = 2;
  const EvalReport rep = evaluate(gt, hyp);
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_EQ(rep.rows[0].label, "Flower");
  EXPECT_EQ(rep.rows[0].ids, 1.0);
  EXPECT_DOUBLE_EQ(*rep.rows[0].mota, 0.9);
  EXPECT_EQ(rep.skipped_classes, (std::vector<int>{1, 2}));
  EXPECT_NE(format_table(rep).find("Flower"), std::string::npos);
}

TEST(Report, InferredCanBeExcluded)
{
  const auto gt = straight_track(1, 4);
  auto hyp = as_hyp(gt);
  hyp[2].status = TrackStatus::inferred;
  EvalOptions opt;
  EXPECT_EQ(*evaluate(gt, hyp, opt).all().mota, 1.0);
  opt.include_inferred = false;
  EXPECT_DOUBLE_EQ(*evaluate(gt, hyp, opt).all().mota, 0.75);
}

TEST(Report, AllRowIsUnweightedMean)
{
  std::vector<GtRecord> gt = straight_track(1, 10);
  for (int f = 1; f <= 2; ++f) gt.push_back({f, 1, 2, BBox(300, 10.0 * f, 20, 20)});
  auto hyp = as_hyp(gt);
  hyp.erase(hyp.begin());  // class 0 loses one of ten boxes
  const EvalReport rep = evaluate(gt, hyp);
  ASSERT_EQ(rep.rows.size(), 3u);
  EXPECT_DOUBLE_EQ(*rep.all().mota, (0.9 + 1.0) / 2.0);
}
