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

#include "liquidseg/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "liquidseg/dataset.h"
#include "liquidseg/rng.h"

namespace liquidseg {
namespace {

constexpr double kTwoPi = 6.283185307179586;

// Base tint per class, label order.
constexpr float kClassColor[kNumLiquidClasses][3] = {
    {0.35f, 0.65f, 0.95f},  // water
    {0.50f, 0.05f, 0.15f},  // wine
    {1.00f, 0.55f, 0.05f},  // juice
    {0.95f, 0.35f, 0.65f},  // cocktails
    {0.60f, 0.30f, 0.10f},  // soda
    {0.25f, 0.13f, 0.05f},  // coffee
    {0.75f, 0.45f, 0.10f},  // tea
    {0.80f, 0.70f, 0.55f},  // boba
    {0.10f, 0.90f, 0.30f},  // chemical
    {0.55f, 0.25f, 0.85f},  // medical
    {0.97f, 0.97f, 0.95f},  // milk
    {0.90f, 0.85f, 0.40f},  // spirits
    {0.95f, 0.70f, 0.00f},  // honey
    {0.20f, 0.55f, 0.50f},  // misc
};

double edge_radius(const BlobGeometry& g, double theta) {
  double r = 1.0;
  for (int i = 0; i < 3; ++i) r += g.amp[i] * std::cos((i + 2) * theta + g.phase[i]);
  return g.radius * r;
}

// Signed distance proxy: positive inside, in pixels along the ray.
double inside_depth(const BlobGeometry& g, double x, double y) {
  const double dx = x - g.cx;
  const double dy = y - g.cy;
  return edge_radius(g, std::atan2(dy, dx)) - std::sqrt(dx * dx + dy * dy);
}

BlobGeometry sample_geometry(Rng& rng, int height, int width, double min_r,
                             double max_r) {
  BlobGeometry g;
  const double side = std::min(height, width);
  g.radius = rng.uniform(min_r, max_r) * side;
  g.cx = rng.uniform(0.5 * g.radius, width - 0.5 * g.radius);
  g.cy = rng.uniform(0.5 * g.radius, height - 0.5 * g.radius);
  for (int i = 0; i < 3; ++i) {
    g.amp[i] = rng.uniform(0.0, 0.12);
    g.phase[i] = rng.uniform(0.0, kTwoPi);
  }
  return g;
}

}  // namespace

bool blob_contains(const BlobGeometry& g, double x, double y) {
  return inside_depth(g, x, y) >= 0.0;
}

void GeneratorConfig::validate() const {
  if (height < 4 || width < 4) throw std::invalid_argument("synth: image too small");
  if (min_blobs < 0 || max_blobs > 4 || min_blobs > max_blobs) {
    throw std::invalid_argument("synth: blob count range must lie in [0, 4]");
  }
  if (min_opacity < 0.3 || max_opacity > 1.0 || min_opacity > max_opacity) {
    throw std::invalid_argument("synth: opacity range must lie in [0.3, 1]");
  }
  if (!(min_radius > 0) || max_radius < min_radius) {
    throw std::invalid_argument("synth: radius range must be positive and ordered");
  }
  for (auto c : classes) {
    if (c < 1 || c > kNumLiquidClasses) {
      throw std::invalid_argument("synth: class ids must be in 1..14");
    }
  }
}

Scene synth_scene(const SceneSpec& spec, std::uint64_t seed) {
  if (spec.blobs.size() > 4) {
    throw std::invalid_argument("synth_scene: at most 4 blobs");
  }
  for (const auto& b : spec.blobs) {
    if (b.class_id < 1 || b.class_id > kNumLiquidClasses) {
      throw std::invalid_argument("synth_scene: class id out of range");
    }
    if (b.opacity < 0.3 || b.opacity > 1.0) {
      throw std::invalid_argument("synth_scene: opacity must be in [0.3, 1]");
    }
  }
  const int H = spec.height;
  const int W = spec.width;
  Rng rng(seed);

  // background: tinted gradient plus an oriented sinusoidal texture
  float base[3];
  for (float& v : base) v = static_cast<float>(rng.uniform(0.25, 0.75));
  const double gx = rng.uniform(-0.25, 0.25);
  const double gy = rng.uniform(-0.25, 0.25);
  const double freq = rng.uniform(0.15, 0.6);
  const double angle = rng.uniform(0.0, kTwoPi);
  const double tex_amp = rng.uniform(0.03, 0.10);
  const double ca = std::cos(angle), sa = std::sin(angle);
  Scene scene{Image(H, W), LabelMap(H, W, 0)};
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const double u = (x + 0.5) / W - 0.5;
      const double v = (y + 0.5) / H - 0.5;
      const double tex = tex_amp * std::sin(freq * (ca * x + sa * y));
      for (int c = 0; c < 3; ++c) {
        const double noise = rng.uniform(-0.02, 0.02);
        scene.image.at(y, x, c) = static_cast<float>(
            std::clamp(base[c] + gx * u + gy * v + tex + noise, 0.0, 1.0));
      }
    }
  }

  for (const auto& b : spec.blobs) {
    const BlobGeometry g = b.geometry ? *b.geometry
                                      : sample_geometry(rng, H, W, 0.15, 0.32);
    const double streak_angle = rng.uniform(0.0, kTwoPi);
    const double streak_offset = rng.uniform(-0.4, 0.4) * g.radius;
    const double shade = rng.uniform(-0.08, 0.08);
    const float* tint = kClassColor[b.class_id - 1];
    const double a = b.opacity;
    const double rim = std::max(1.0, 0.08 * g.radius);
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        const double px = x + 0.5, py = y + 0.5;
        const double depth = inside_depth(g, px, py);
        if (depth < 0.0) continue;
        scene.mask.at(y, x) = b.class_id;
        // darker meniscus near the outline
        const double rim_dark = depth < rim ? 0.35 * (1.0 - depth / rim) : 0.0;
        double streak = 0.0;
        if (b.specular) {
          const double dist = std::abs(-std::sin(streak_angle) * (px - g.cx) +
                                       std::cos(streak_angle) * (py - g.cy) -
                                       streak_offset);
          const double half_width = std::max(0.75, 0.08 * g.radius);
          if (dist < half_width) streak = 0.6 * (1.0 - dist / half_width);
        }
        for (int c = 0; c < 3; ++c) {
          float& pix = scene.image.at(y, x, c);
          double liquid = tint[c] * (1.0 + shade) * (1.0 - rim_dark);
          double mixed = a * liquid + (1.0 - a) * pix;
          mixed += streak * (1.0 - mixed);
          pix = static_cast<float>(std::clamp(mixed, 0.0, 1.0));
        }
      }
    }
  }
  return scene;
}

SceneSpec sample_scene_spec(const GeneratorConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(mix_seed(seed, 0x5ce4e));
  SceneSpec spec;
  spec.height = cfg.height;
  spec.width = cfg.width;
  const int n = cfg.min_blobs +
                static_cast<int>(rng.below(static_cast<std::uint64_t>(
                    cfg.max_blobs - cfg.min_blobs + 1)));
  for (int i = 0; i < n; ++i) {
    BlobSpec b;
    if (cfg.classes.empty()) {
      b.class_id = static_cast<std::uint8_t>(1 + rng.below(kNumLiquidClasses));
    } else {
      b.class_id = cfg.classes[rng.below(cfg.classes.size())];
    }
    b.opacity = rng.uniform(cfg.min_opacity, cfg.max_opacity);
    b.specular = rng.uniform() < cfg.specular_prob;
    b.geometry = sample_geometry(rng, cfg.height, cfg.width, cfg.min_radius,
                                 cfg.max_radius);
    spec.blobs.push_back(b);
  }
  return spec;
}

SyntheticItem synth_item(const GeneratorConfig& cfg, std::uint64_t seed,
                         int index) {
  const std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(index));
  const SceneSpec spec = sample_scene_spec(cfg, s);
  char id[32];
  std::snprintf(id, sizeof(id), "synth_%05d", index);
  SyntheticItem item;
  item.id = id;
  item.scene = synth_scene(spec, s);
  item.easy = spec.blobs.size() <= 1;
  return item;
}

void write_synthetic_dataset(const std::filesystem::path& root,
                             const GeneratorConfig& cfg, int count,
                             std::uint64_t seed, const std::string& split) {
  namespace fs = std::filesystem;
  cfg.validate();
  fs::create_directories(root / "images");
  fs::create_directories(root / "masks");
  std::vector<DatasetRecord> records;
  for (int i = 0; i < count; ++i) {
    SyntheticItem item = synth_item(cfg, seed, i);
    write_image(root / "images" / (item.id + ".png"), item.scene.image);
    write_label_map(root / "masks" / (item.id + ".png"), item.scene.mask);
    DatasetRecord r;
    r.id = item.id;
    r.split = split;
    r.primary_class = primary_class_of(item.scene.mask);
    r.difficulty = item.easy ? "easy" : "hard";
    records.push_back(std::move(r));
  }
  write_manifest(root, records);
}

}  // namespace liquidseg
