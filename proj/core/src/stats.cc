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

#include "liquidseg/stats.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "liquidseg/metrics.h"

namespace liquidseg {
namespace {

bool is_liquid(std::uint8_t l) { return l >= 1 && l <= kNumLiquidClasses; }

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

ClassDistribution count_distributions(const std::vector<LabelMap>& masks) {
  if (masks.empty()) throw std::invalid_argument("count_distributions: empty dataset");
  constexpr int C = kNumLiquidClasses;
  ClassDistribution d;
  d.num_images = masks.size();
  d.images_with_class.assign(C + 1, 0);
  d.class_pixels.assign(C + 1, 0);
  for (const auto& m : masks) {
    std::vector<std::uint64_t> counts(256, 0);
    for (std::uint8_t l : m.labels) ++counts[l];
    for (int c = 1; c <= C; ++c) {
      if (counts[c] > 0) ++d.images_with_class[c];
      d.class_pixels[c] += counts[c];
      d.liquid_pixels += counts[c];
    }
  }
  d.presence.assign(C + 1, 0.0);
  d.pixel_share.assign(C + 1, 0.0);
  for (int c = 1; c <= C; ++c) {
    d.presence[c] = static_cast<double>(d.images_with_class[c]) / d.num_images;
    if (d.liquid_pixels > 0) {
      d.pixel_share[c] = static_cast<double>(d.class_pixels[c]) / d.liquid_pixels;
    }
  }
  return d;
}

LocationMap location_map(const std::vector<LabelMap>& masks, int grid) {
  if (grid < 1) throw std::invalid_argument("location_map: grid must be >= 1");
  LocationMap map;
  map.grid = grid;
  map.values.assign(static_cast<std::size_t>(grid) * grid, 0.0);
  if (masks.empty()) return map;
  std::vector<std::size_t> hits(map.values.size(), 0);
  for (const auto& m : masks) {
    const LabelMap small = resize_nearest(m, grid, grid);
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i] += is_liquid(small.labels[i]);
  }
  for (std::size_t i = 0; i < hits.size(); ++i) {
    map.values[i] = static_cast<double>(hits[i]) / masks.size();
  }
  return map;
}

double liquid_fraction(const LabelMap& mask) {
  std::size_t n = 0;
  for (std::uint8_t l : mask.labels) n += is_liquid(l);
  return static_cast<double>(n) / mask.labels.size();
}

AreaHistogram area_distribution(const std::vector<LabelMap>& masks, int bins) {
  if (bins < 1) throw std::invalid_argument("area_distribution: bins must be >= 1");
  AreaHistogram h;
  h.counts.assign(bins, 0);
  for (const auto& m : masks) {
    const double f = liquid_fraction(m);
    h.fractions.push_back(f);
    const int b = std::min(static_cast<int>(std::floor(f * bins)), bins - 1);
    ++h.counts[b];
  }
  return h;
}

void write_pgm(const std::filesystem::path& path, const LocationMap& map) {
  auto out = open_out(path);
  out << "P5\n" << map.grid << ' ' << map.grid << "\n255\n";
  for (double v : map.values) {
    out.put(static_cast<char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  }
}

void write_dataset_stats(const std::filesystem::path& out_dir,
                         const std::vector<DatasetRecord>& records, int grid,
                         int bins) {
  std::filesystem::create_directories(out_dir);
  std::vector<LabelMap> masks;
  std::map<std::string, std::vector<LabelMap>> by_split;
  for (const auto& r : records) {
    masks.push_back(read_label_map(r.mask_path));
    by_split[r.split.empty() ? "all" : r.split].push_back(masks.back());
  }
  const ClassDistribution d = count_distributions(masks);
  const auto& names = liquid_class_names();

  auto presence = open_out(out_dir / "class_presence.csv");
  presence << "class,images,presence\n";
  auto pixels = open_out(out_dir / "class_pixels.csv");
  pixels << "class,pixels,share\n";
  for (int c = 1; c <= kNumLiquidClasses; ++c) {
    presence << names[c - 1] << ',' << d.images_with_class[c] << ','
             << fmt(d.presence[c]) << '\n';
    pixels << names[c - 1] << ',' << d.class_pixels[c] << ','
           << fmt(d.pixel_share[c]) << '\n';
  }

  const AreaHistogram h = area_distribution(masks, bins);
  auto area = open_out(out_dir / "area_hist.csv");
  area << "bin_low,bin_high,count\n";
  for (int b = 0; b < bins; ++b) {
    area << fmt(static_cast<double>(b) / bins) << ','
         << fmt(static_cast<double>(b + 1) / bins) << ',' << h.counts[b] << '\n';
  }

  for (const auto& [split, split_masks] : by_split) {
    write_pgm(out_dir / ("location_" + split + ".pgm"),
              location_map(split_masks, grid));
  }
}

}  // namespace liquidseg
