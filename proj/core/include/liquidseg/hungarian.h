/* Copyright 2026 The liquidseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef LIQUIDSEG_HUNGARIAN_H_
#define LIQUIDSEG_HUNGARIAN_H_

#include <cstddef>
#include <vector>

namespace liquidseg {

// rows x cols, row-major.
struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  CostMatrix() = default;
  CostMatrix(std::size_t r, std::size_t c)
      : rows(r), cols(c), values(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

struct MatchResult {
  // assignment[row] = column; injective.
  std::vector<std::size_t> assignment;
  double total_cost = 0.0;
};

// Minimum-cost injective assignment of every row to a distinct column
// (shortest augmenting paths with potentials, O(rows^2 * cols)). Requires
// rows <= cols and finite costs; throws std::invalid_argument otherwise.
MatchResult hungarian_match(const CostMatrix& cost);

}  // namespace liquidseg

#endif  // LIQUIDSEG_HUNGARIAN_H_
