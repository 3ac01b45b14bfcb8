// Copyright 2026 The textspot Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "textspot/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "textspot/error.hpp"

namespace textspot {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void CheckCosts(const CostMatrix& costs) {
  if (costs.rows > costs.cols) {
    throw ArgumentError("cost matrix has more rows (" +
                        std::to_string(costs.rows) + ") than columns (" +
                        std::to_string(costs.cols) + ")");
  }
  for (double x : costs.data) {
    if (!std::isfinite(x)) throw ArgumentError("cost matrix entry not finite");
  }
}

// Shortest augmenting path Hungarian method over the sub-matrix selected by
// `rows` x `cols`. Rectangular inputs (|rows| <= |cols|) are handled
// directly: the potentials of unmatched columns never produce phantom
// matches. Returns the optimal cost.
double HungarianCost(const CostMatrix& a, const std::vector<std::size_t>& rows,
                     const std::vector<std::size_t>& cols,
                     std::vector<std::size_t>* assignment) {
  const std::size_t n = rows.size();
  const std::size_t m = cols.size();
  if (n == 0) {
    if (assignment) assignment->clear();
    return 0.0;
  }
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  std::vector<double> minv(m + 1);
  std::vector<char> used(m + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(rows[i0 - 1], cols[j - 1]) - u[i0] - v[j];
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
  std::vector<std::size_t> local(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) local[p[j] - 1] = j - 1;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += a(rows[i], cols[local[i]]);
  if (assignment) *assignment = std::move(local);
  return total;
}

MatchResult Finish(const CostMatrix& costs,
                   std::vector<std::size_t> assignment) {
  MatchResult result;
  result.assignment = std::move(assignment);
  for (std::size_t i = 0; i < result.assignment.size(); ++i) {
    const double c = costs(i, result.assignment[i]);
    result.total_cost += c;
    PairCost pair;
    pair.row = i;
    pair.col = result.assignment[i];
    pair.total = c;
    result.pairs.push_back(pair);
  }
  return result;
}

}  // namespace

MatchResult SolveAssignment(const CostMatrix& costs) {
  CheckCosts(costs);
  const std::size_t n = costs.rows;
  const std::size_t m = costs.cols;
  std::vector<std::size_t> all_rows(n), all_cols(m);
  for (std::size_t i = 0; i < n; ++i) all_rows[i] = i;
  for (std::size_t j = 0; j < m; ++j) all_cols[j] = j;
  const double optimum = HungarianCost(costs, all_rows, all_cols, nullptr);

  double scale = 1.0;
  for (double x : costs.data) scale = std::max(scale, std::abs(x));
  const double tol = 1e-12 * scale * static_cast<double>(n + 1);

  // Fix rows one at a time to the smallest column that still admits an
  // optimal completion.
  std::vector<std::size_t> assignment;
  std::vector<char> taken(m, 0);
  double prefix = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<std::size_t> rest_rows(all_rows.begin() + r + 1,
                                       all_rows.end());
    bool fixed = false;
    for (std::size_t c = 0; c < m && !fixed; ++c) {
      if (taken[c]) continue;
      std::vector<std::size_t> rest_cols;
      for (std::size_t j = 0; j < m; ++j) {
        if (!taken[j] && j != c) rest_cols.push_back(j);
      }
      const double completion =
          prefix + costs(r, c) +
          HungarianCost(costs, rest_rows, rest_cols, nullptr);
      if (completion <= optimum + tol) {
        assignment.push_back(c);
        taken[c] = 1;
        prefix += costs(r, c);
        fixed = true;
      }
    }
    if (!fixed) throw NumericError("assignment refinement lost the optimum");
  }
  return Finish(costs, std::move(assignment));
}

MatchResult BruteForceAssignment(const CostMatrix& costs) {
  CheckCosts(costs);
  if (costs.cols > kBruteForceMaxCols) {
    throw ArgumentError("brute-force assignment refuses more than " +
                        std::to_string(kBruteForceMaxCols) + " columns");
  }
  const std::size_t n = costs.rows;
  const std::size_t m = costs.cols;
  std::vector<std::size_t> current(n), best;
  std::vector<char> taken(m, 0);
  double best_cost = kInf;

  // Depth-first in ascending column order visits assignments in
  // lexicographic order, so only strict improvements replace the incumbent.
  auto recurse = [&](auto&& self, std::size_t row) -> void {
    if (row == n) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += costs(i, current[i]);
      if (total < best_cost) {
        best_cost = total;
        best = current;
      }
      return;
    }
    for (std::size_t c = 0; c < m; ++c) {
      if (taken[c]) continue;
      taken[c] = 1;
      current[row] = c;
      self(self, row + 1);
      taken[c] = 0;
    }
  };
  recurse(recurse, 0);
  return Finish(costs, std::move(best));
}

}  // namespace textspot
