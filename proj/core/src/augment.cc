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

#include "liquidseg/augment.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "liquidseg/rng.h"

namespace liquidseg {
namespace {

float luma(const Image& img, int y, int x) {
  return 0.299f * img.at(y, x, 0) + 0.587f * img.at(y, x, 1) +
         0.114f * img.at(y, x, 2);
}

void color_jitter(Image& img, double brightness, double contrast,
                  double saturation) {
  if (brightness != 1.0) {
    for (auto& v : img.pixels) {
      v = std::clamp(static_cast<float>(v * brightness), 0.0f, 1.0f);
    }
  }
  if (contrast != 1.0) {
    double mean = 0;
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) mean += luma(img, y, x);
    }
    mean /= static_cast<double>(img.height) * img.width;
    for (auto& v : img.pixels) {
      v = std::clamp(static_cast<float>(mean + (v - mean) * contrast), 0.0f, 1.0f);
    }
  }
  if (saturation != 1.0) {
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        const float g = luma(img, y, x);
        for (int c = 0; c < 3; ++c) {
          float& v = img.at(y, x, c);
          v = std::clamp(static_cast<float>(g + (v - g) * saturation), 0.0f, 1.0f);
        }
      }
    }
  }
}

}  // namespace

void AugmentConfig::validate() const {
  if (brightness < 0 || contrast < 0 || saturation < 0 || brightness >= 1 ||
      contrast >= 1 || saturation >= 1) {
    throw std::invalid_argument("augment: jitter strengths must be in [0, 1)");
  }
  if (flip_prob < 0 || flip_prob > 1) {
    throw std::invalid_argument("augment: flip_prob must be in [0, 1]");
  }
  if (!(scale_min > 0) || scale_max < scale_min) {
    throw std::invalid_argument("augment: scale range must be positive and ordered");
  }
  if (crop_size < 1) throw std::invalid_argument("augment: crop_size must be >= 1");
}

Sample augment(const Image& image, const LabelMap& mask,
               const AugmentConfig& cfg, std::uint64_t seed) {
  if (image.height != mask.height || image.width != mask.width) {
    throw std::invalid_argument("augment: image and mask sizes differ");
  }
  cfg.validate();
  Rng rng(seed);
  const double b = 1.0 + cfg.brightness * (2.0 * rng.uniform() - 1.0);
  const double c = 1.0 + cfg.contrast * (2.0 * rng.uniform() - 1.0);
  const double s = 1.0 + cfg.saturation * (2.0 * rng.uniform() - 1.0);
  const bool flip = rng.uniform() < cfg.flip_prob;
  const double scale = rng.uniform(cfg.scale_min, cfg.scale_max);
  const double crop_u = rng.uniform();
  const double crop_v = rng.uniform();

  Sample out{image, mask};
  color_jitter(out.image, b, c, s);
  if (flip) {
    out.image = flip_horizontal(out.image);
    out.mask = flip_horizontal(out.mask);
  }
  const int sh = std::max(1, static_cast<int>(std::lround(image.height * scale)));
  const int sw = std::max(1, static_cast<int>(std::lround(image.width * scale)));
  out.image = resize_bilinear(out.image, sh, sw);
  out.mask = resize_nearest(out.mask, sh, sw);

  const int S = cfg.crop_size;
  const int ph = std::max(S, sh);
  const int pw = std::max(S, sw);
  const int oy = static_cast<int>(crop_u * (ph - S + 1));
  const int ox = static_cast<int>(crop_v * (pw - S + 1));
  Sample cropped{Image(S, S, cfg.image_fill), LabelMap(S, S, cfg.mask_fill)};
  for (int y = 0; y < S; ++y) {
    const int sy = oy + y;
    if (sy >= sh) continue;
    for (int x = 0; x < S; ++x) {
      const int sx = ox + x;
      if (sx >= sw) continue;
      for (int ch = 0; ch < 3; ++ch) cropped.image.at(y, x, ch) = out.image.at(sy, sx, ch);
      cropped.mask.at(y, x) = out.mask.at(sy, sx);
    }
  }
  return cropped;
}

Sample fit_square(const Image& image, const LabelMap& mask, int size) {
  if (image.height == size && image.width == size) return {image, mask};
  const int shorter = std::min(image.height, image.width);
  const int h = static_cast<int>(std::lround(static_cast<double>(image.height) * size / shorter));
  const int w = static_cast<int>(std::lround(static_cast<double>(image.width) * size / shorter));
  const Image ri = resize_bilinear(image, std::max(h, size), std::max(w, size));
  const LabelMap rm = resize_nearest(mask, ri.height, ri.width);
  const int oy = (ri.height - size) / 2;
  const int ox = (ri.width - size) / 2;
  Sample out{Image(size, size), LabelMap(size, size)};
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      for (int c = 0; c < 3; ++c) out.image.at(y, x, c) = ri.at(oy + y, ox + x, c);
      out.mask.at(y, x) = rm.at(oy + y, ox + x);
    }
  }
  return out;
}

}  // namespace liquidseg
