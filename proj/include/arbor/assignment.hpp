#pragma once

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

namespace arbor {

struct Assignment {
  // row_to_col[r] is the column assigned to row r.
  std::vector<int> row_to_col;
  double cost = 0.0;
};

// Minimum-cost perfect assignment on a square cost matrix (Hungarian method with
// row/column potentials, O(n^3)). `cost` is row-major n x n.
template <class T>
Assignment solve_assignment(const std::vector<T>& cost, std::size_t n) {
  if (cost.size() != n * n) throw std::invalid_argument("solve_assignment: cost matrix is not n x n");
  Assignment out;
  out.row_to_col.assign(n, -1);
  if (n == 0) return out;
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials and matching; column 0 is a sentinel.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> col_owner(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    col_owner[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = col_owner[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = double(cost[(i0 - 1) * n + (j - 1)]) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[col_owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      col_owner[j0] = col_owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= n; ++j) out.row_to_col[col_owner[j] - 1] = int(j - 1);
  for (std::size_t r = 0; r < n; ++r) out.cost += double(cost[r * n + std::size_t(out.row_to_col[r])]);
  return out;
}

}  // namespace arbor
