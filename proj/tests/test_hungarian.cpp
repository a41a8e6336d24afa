#include <gtest/gtest.h>

#include <random>
#include <set>

#include "ibtrack/hungarian.hpp"
#include "oracles.hpp"

using ibtrack::CostMatrix;

namespace {

std::vector<std::vector<double>> rows_of(const CostMatrix& m)
{
  std::vector<std::vector<double>> out(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  return out;
}

}  // namespace

TEST(Hungarian, TwoByTwo)
{
  CostMatrix m(2, 2);
  m(0, 0) = 1; m(0, 1) = 2;
  m(1, 0) = 2; m(1, 1) = 4;
  const auto a = ibtrack::hungarian(m);
  const ibtrack::Assignment expected{{0, 1}, {1, 0}};
  EXPECT_EQ(a, expected);
  EXPECT_EQ(ibtrack::assignment_cost(m, a), 4.0);
}

TEST(Hungarian, EmptyAndRectangular)
{
  EXPECT_TRUE(ibtrack::hungarian(CostMatrix(0, 3)).empty());
  EXPECT_TRUE(ibtrack::hungarian(CostMatrix(3, 0)).empty());

  CostMatrix wide(1, 3);
  wide(0, 0) = 5; wide(0, 1) = 1; wide(0, 2) = 3;
  EXPECT_EQ(ibtrack::hungarian(wide), (ibtrack::Assignment{{0, 1}}));

  CostMatrix tall(3, 1);
  tall(0, 0) = 5; tall(1, 0) = 4; tall(2, 0) = 6;
  EXPECT_EQ(ibtrack::hungarian(tall), (ibtrack::Assignment{{1, 0}}));
}

TEST(Hungarian, MatchesPermutationOracle)
{
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> dim(1, 5);
  std::uniform_int_distribution<int> val(-20, 50);
  for (int k = 0; k < 300; ++k) {
    CostMatrix m(static_cast<std::size_t>(dim(rng)), static_cast<std::size_t>(dim(rng)));
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = val(rng);
    const auto a = ibtrack::hungarian(m);
    ASSERT_EQ(a.size(), std::min(m.rows(), m.cols()));
    std::set<std::size_t> rs, cs;
    for (const auto& [r, c] : a) {
      rs.insert(r);
      cs.insert(c);
    }
    ASSERT_EQ(rs.size(), a.size());
    ASSERT_EQ(cs.size(), a.size());
    ASSERT_EQ(ibtrack::assignment_cost(m, a), oracle::brute_force_min_cost(rows_of(m))) << "matrix " << k;
  }
}

TEST(Hungarian, InvariantUnderRowConstant)
{
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> val(0, 30);
  CostMatrix m(4, 4);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) m(r, c) = val(rng);
  const double base = ibtrack::assignment_cost(m, ibtrack::hungarian(m));
  CostMatrix shifted = m;
  for (std::size_t c = 0; c < 4; ++c) shifted(2, c) += 7;
  EXPECT_EQ(ibtrack::assignment_cost(shifted, ibtrack::hungarian(shifted)), base + 7);
}
