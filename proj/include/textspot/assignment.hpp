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

#ifndef TEXTSPOT_ASSIGNMENT_HPP_
#define TEXTSPOT_ASSIGNMENT_HPP_

#include <cstddef>
#include <vector>

#include "textspot/matrix.hpp"

namespace textspot {

// rows = ground-truth instances (M), cols = predictions (N), M <= N.
using CostMatrix = Matrix;

struct PairCost {
  std::size_t row = 0;
  std::size_t col = 0;
  double classification = 0.0;
  double box = 0.0;
  double recognition = 0.0;
  double total = 0.0;
};

struct MatchResult {
  // assignment[i] is the prediction matched to ground-truth row i.
  std::vector<std::size_t> assignment;
  double total_cost = 0.0;
  std::vector<PairCost> pairs;  // one per row, in row order
};

// Minimum-cost injective map rows -> cols (Kuhn-Munkres with potentials).
// Among optimal assignments the lexicographically smallest vector is
// returned. Throws ArgumentError when rows > cols or an entry is not finite.
MatchResult SolveAssignment(const CostMatrix& costs);

// Exhaustive enumeration; refuses matrices with more than 8 columns.
MatchResult BruteForceAssignment(const CostMatrix& costs);

inline constexpr std::size_t kBruteForceMaxCols = 8;

}  // namespace textspot

#endif  // TEXTSPOT_ASSIGNMENT_HPP_
