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

#ifndef LIQUIDSEG_SYNTH_H_
#define LIQUIDSEG_SYNTH_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "liquidseg/image.h"

// Procedural liquid-like scenes: textured background with alpha-blended
// smooth blobs. Semi-transparent blobs let the background show through;
// each blob has a darker rim and optionally a specular streak.
namespace liquidseg {

// Star-shaped outline r(theta) = radius * (1 + sum_i amp[i] cos((i+2) theta
// + phase[i])) around (cx, cy), in pixel units.
struct BlobGeometry {
  double cx = 0, cy = 0, radius = 1;
  std::array<double, 3> amp{};
  std::array<double, 3> phase{};
};

// Whether point (x, y) (pixel centers are at +0.5) lies inside the blob.
bool blob_contains(const BlobGeometry& g, double x, double y);

struct BlobSpec {
  std::uint8_t class_id = 1;
  double opacity = 1.0;  // in [0.3, 1]
  bool specular = false;
  std::optional<BlobGeometry> geometry;  // sampled from the seed if absent
};

struct SceneSpec {
  int height = 64;
  int width = 64;
  std::vector<BlobSpec> blobs;  // z-order: later blobs on top
};

struct GeneratorConfig {
  int height = 64;
  int width = 64;
  int min_blobs = 1;
  int max_blobs = 3;
  double min_opacity = 0.3;
  double max_opacity = 1.0;
  double specular_prob = 0.3;
  double min_radius = 0.15;  // fraction of min(H, W)
  double max_radius = 0.32;
  std::vector<std::uint8_t> classes;  // empty: all of 1..14

  void validate() const;
  bool operator==(const GeneratorConfig&) const = default;
};

struct Scene {
  Image image;
  LabelMap mask;
};

// Throws std::invalid_argument for a spec with more than 4 blobs, classes
// outside 1..14 or opacity outside [0.3, 1].
Scene synth_scene(const SceneSpec& spec, std::uint64_t seed);

SceneSpec sample_scene_spec(const GeneratorConfig& cfg, std::uint64_t seed);

// Scene i uses seed mix(seed, i). Easy scenes have a single blob.
struct SyntheticItem {
  std::string id;
  Scene scene;
  bool easy = false;
};
SyntheticItem synth_item(const GeneratorConfig& cfg, std::uint64_t seed,
                         int index);

// Writes images/, masks/ and manifest.csv (all records tagged `split`).
void write_synthetic_dataset(const std::filesystem::path& root,
                             const GeneratorConfig& cfg, int count,
                             std::uint64_t seed,
                             const std::string& split = "train");

}  // namespace liquidseg

#endif  // LIQUIDSEG_SYNTH_H_
