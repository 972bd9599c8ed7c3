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

#include "liquidseg/boundary.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace liquidseg {

int boundary_thickness(int height, int width) {
  if (height < 1 || width < 1) {
    throw std::invalid_argument("boundary_thickness: sizes must be >= 1");
  }
  const double diag = std::sqrt(static_cast<double>(height) * height +
                                static_cast<double>(width) * width);
  return std::max(1, static_cast<int>(std::lround(0.01 * diag)));
}

BoundaryMask boundary_from_mask(const LabelMap& mask, int thickness) {
  if (thickness < 1) {
    throw std::invalid_argument("boundary_from_mask: thickness must be >= 1");
  }
  const int H = mask.height;
  const int W = mask.width;
  std::vector<std::uint8_t> edge(static_cast<std::size_t>(H) * W, 0);
  constexpr int kDy[4] = {-1, 1, 0, 0};
  constexpr int kDx[4] = {0, 0, -1, 1};
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const std::uint8_t l = mask.at(y, x);
      if (l == kIgnoreLabel) continue;
      for (int d = 0; d < 4; ++d) {
        const int ny = y + kDy[d];
        const int nx = x + kDx[d];
        if (ny < 0 || ny >= H || nx < 0 || nx >= W) continue;
        const std::uint8_t n = mask.at(ny, nx);
        if (n != kIgnoreLabel && n != l) {
          edge[static_cast<std::size_t>(y) * W + x] = 1;
          break;
        }
      }
    }
  }

  // Chebyshev dilation by r == separable max filter of half-width r.
  const int r = (thickness - 1) / 2;
  std::vector<std::uint8_t> rows(edge.size(), 0);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      std::uint8_t v = 0;
      for (int k = std::max(0, x - r); k <= std::min(W - 1, x + r) && !v; ++k) {
        v = edge[static_cast<std::size_t>(y) * W + k];
      }
      rows[static_cast<std::size_t>(y) * W + x] = v;
    }
  }
  BoundaryMask out{H, W, std::vector<std::uint8_t>(edge.size(), 0)};
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      std::uint8_t v = 0;
      for (int k = std::max(0, y - r); k <= std::min(H - 1, y + r) && !v; ++k) {
        v = rows[static_cast<std::size_t>(k) * W + x];
      }
      out.values[static_cast<std::size_t>(y) * W + x] = v;
    }
  }
  return out;
}

void write_boundary_debug(const std::filesystem::path& path,
                          const BoundaryMask& boundary) {
  LabelMap img(boundary.height, boundary.width);
  for (std::size_t i = 0; i < img.labels.size(); ++i) {
    img.labels[i] = boundary.values[i] ? 255 : 0;
  }
  write_label_map(path, img);
}

}  // namespace liquidseg
