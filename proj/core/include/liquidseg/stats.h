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

#ifndef LIQUIDSEG_STATS_H_
#define LIQUIDSEG_STATS_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "liquidseg/dataset.h"
#include "liquidseg/image.h"

namespace liquidseg {

// Index == label; index 0 unused.
struct ClassDistribution {
  std::size_t num_images = 0;
  std::uint64_t liquid_pixels = 0;
  std::vector<std::size_t> images_with_class;
  std::vector<std::uint64_t> class_pixels;
  std::vector<double> presence;  // fraction of images containing the class
  std::vector<double> pixel_share;  // fraction of liquid pixels; 0 if none
};

// Throws std::invalid_argument on an empty set.
ClassDistribution count_distributions(const std::vector<LabelMap>& masks);

// Fraction of images whose nearest-resized G x G mask is liquid per cell.
struct LocationMap {
  int grid = 0;
  std::vector<double> values;  // row-major G x G
  double at(int y, int x) const { return values[static_cast<std::size_t>(y) * grid + x]; }
};

LocationMap location_map(const std::vector<LabelMap>& masks, int grid = 64);

struct AreaHistogram {
  std::vector<std::size_t> counts;
  std::vector<double> fractions;  // per image, input order
};

double liquid_fraction(const LabelMap& mask);

// Bin of fraction f is min(floor(f * bins), bins - 1).
AreaHistogram area_distribution(const std::vector<LabelMap>& masks,
                                int bins = 10);

// Writes class_presence.csv, class_pixels.csv, area_hist.csv and one
// location_{split}.pgm per split present in `records`.
void write_dataset_stats(const std::filesystem::path& out_dir,
                         const std::vector<DatasetRecord>& records,
                         int grid = 64, int bins = 10);

void write_pgm(const std::filesystem::path& path, const LocationMap& map);

}  // namespace liquidseg

#endif  // LIQUIDSEG_STATS_H_
