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

#ifndef LIQUIDSEG_BOUNDARY_H_
#define LIQUIDSEG_BOUNDARY_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "liquidseg/image.h"

namespace liquidseg {

// H x W binary band (0/1) around label transitions.
struct BoundaryMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> values;

  std::uint8_t at(int y, int x) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  bool operator==(const BoundaryMask&) const = default;
};

// round(0.01 * sqrt(H^2 + W^2)), at least 1.
int boundary_thickness(int height, int width);

// Edge pixels are those with a 4-neighbor of a different label (ignore-label
// pixels take no part on either side). The band is every pixel within
// Chebyshev distance (thickness - 1) / 2 of an edge pixel.
BoundaryMask boundary_from_mask(const LabelMap& mask, int thickness);

// Writes 0/255 8-bit grayscale PNG.
void write_boundary_debug(const std::filesystem::path& path,
                          const BoundaryMask& boundary);

}  // namespace liquidseg

#endif  // LIQUIDSEG_BOUNDARY_H_
