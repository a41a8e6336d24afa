#pragma once

// Rectangular min-cost assignment (Kuhn-Munkres with row/column potentials,
// O(n^2 m)). Returns min(rows, cols) pairs.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace ibtrack {

/// Row-major cost matrix.
class CostMatrix
{
public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
    : rows_(rows), cols_(cols), data_(rows * cols, fill)
  {
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

using Assignment = std::vector<std::pair<std::size_t, std::size_t>>;

namespace detail {

// Requires rows <= cols. match[r] = column assigned to row r.
inline std::vector<std::size_t> hungarian_rows_le_cols(const CostMatrix& cost, bool transposed)
{
  const std::size_t n = transposed ? cost.cols() : cost.rows();
  const std::size_t m = transposed ? cost.rows() : cost.cols();
  auto at = [&](std::size_t r, std::size_t c) {
    return transposed ? cost(c, r) : cost(r, c);
  };
  constexpr double inf = std::numeric_limits<double>::infinity();

  // 1-based potentials; column 0 is the virtual start.
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0);
  std::vector<std::size_t> way(m + 1, 0);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) {
          continue;
        }
        const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> match(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) {
      match[p[j] - 1] = j - 1;
    }
  }
  return match;
}

}  // namespace detail

/// Minimum total cost assignment; each row and column used at most once.
/// Pairs are returned sorted by row.
inline Assignment hungarian(const CostMatrix& cost)
{
  Assignment out;
  if (cost.rows() == 0 || cost.cols() == 0) {
    return out;
  }
  const bool transposed = cost.rows() > cost.cols();
  const auto match = detail::hungarian_rows_le_cols(cost, transposed);
  out.reserve(match.size());
  for (std::size_t k = 0; k < match.size(); ++k) {
    if (transposed) {
      out.emplace_back(match[k], k);
    } else {
      out.emplace_back(k, match[k]);
    }
  }
  if (transposed) {
    std::sort(out.begin(), out.end());
  }
  return out;
}

inline double assignment_cost(const CostMatrix& cost, const Assignment& a)
{
  double total = 0.0;
  for (const auto& [r, c] : a) {
    total += cost(r, c);
  }
  return total;
}

}  // namespace ibtrack
