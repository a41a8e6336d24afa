#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ibtrack/geometry.hpp"
#include "oracles.hpp"

using ibtrack::BBox;

TEST(BBox, RejectsDegenerateBoxes)
{
  EXPECT_THROW(BBox(0, 0, 0, 5), std::invalid_argument);
  EXPECT_THROW(BBox(0, 0, 5, -1), std::invalid_argument);
  EXPECT_THROW(BBox(std::nan(""), 0, 5, 5), std::invalid_argument);
  EXPECT_THROW(BBox(0, std::numeric_limits<double>::infinity(), 5, 5), std::invalid_argument);
  EXPECT_NO_THROW(BBox(-3, -3, 1, 1));
}

TEST(BBox, DerivedCorners)
{
  const BBox b(2, 3, 4, 5);
  EXPECT_EQ(b.x_max(), 6);
  EXPECT_EQ(b.y_max(), 8);
  EXPECT_EQ(ibtrack::area(b), 20);
  EXPECT_EQ(ibtrack::center(b).cx, 4);
  EXPECT_EQ(ibtrack::center(b).cy, 5.5);
}

TEST(Iou, HandExamples)
{
  EXPECT_EQ(ibtrack::iou(BBox(0, 0, 10, 10), BBox(0, 0, 10, 10)), 1.0);
  EXPECT_EQ(ibtrack::iou(BBox(0, 0, 10, 10), BBox(20, 20, 5, 5)), 0.0);
  // touching edges share no area
  EXPECT_EQ(ibtrack::iou(BBox(0, 0, 10, 10), BBox(10, 0, 10, 10)), 0.0);
  EXPECT_DOUBLE_EQ(ibtrack::iou(BBox(0, 0, 10, 10), BBox(5, 0, 10, 10)), 50.0 / 150.0);
  // nested box: intersection is the small box
  EXPECT_DOUBLE_EQ(ibtrack::iou(BBox(0, 0, 10, 10), BBox(2, 2, 5, 5)), 25.0 / 100.0);
}

TEST(Iou, MatchesCellCounting)
{
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> pos(-10, 30);
  std::uniform_int_distribution<int> len(1, 20);
  for (int k = 0; k < 500; ++k) {
    const oracle::IntBox a{pos(rng), pos(rng), len(rng), len(rng)};
    const oracle::IntBox b{pos(rng), pos(rng), len(rng), len(rng)};
    const auto [inter, uni] = oracle::cell_count_overlap(a, b);
    const double expected = static_cast<double>(inter) / static_cast<double>(uni);
    ASSERT_EQ(ibtrack::iou(BBox(a.x, a.y, a.w, a.h), BBox(b.x, b.y, b.w, b.h)), expected)
      << "pair " << k;
  }
}

TEST(Iou, SymmetricBoundedAndTranslationInvariant)
{
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(-50, 50);
  std::uniform_real_distribution<double> len(0.5, 40);
  for (int k = 0; k < 1000; ++k) {
    const BBox a(pos(rng), pos(rng), len(rng), len(rng));
    const BBox b(pos(rng), pos(rng), len(rng), len(rng));
    const double v = ibtrack::iou(a, b);
    EXPECT_EQ(v, ibtrack::iou(b, a));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_EQ(ibtrack::iou(a, a), 1.0);
    const double dx = pos(rng), dy = pos(rng);
    EXPECT_NEAR(ibtrack::iou(ibtrack::translate(a, dx, dy), ibtrack::translate(b, dx, dy)), v, 1e-12);
  }
}

TEST(Geometry, DistanceAndDiagonal)
{
  EXPECT_EQ(ibtrack::distance({0, 0}, {3, 4}), 5.0);
  EXPECT_EQ(ibtrack::diagonal(BBox(1, 1, 6, 8)), 10.0);
}
