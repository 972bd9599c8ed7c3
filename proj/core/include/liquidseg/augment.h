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

#ifndef LIQUIDSEG_AUGMENT_H_
#define LIQUIDSEG_AUGMENT_H_

#include <cstdint>

#include "liquidseg/image.h"

namespace liquidseg {

struct AugmentConfig {
  double brightness = 0.2;  // factor drawn from [1 - b, 1 + b]
  double contrast = 0.2;
  double saturation = 0.2;
  double flip_prob = 0.5;
  double scale_min = 0.5;
  double scale_max = 2.0;
  int crop_size = 512;
  float image_fill = 0.0f;
  std::uint8_t mask_fill = kIgnoreLabel;

  void validate() const;
  bool operator==(const AugmentConfig&) const = default;
};

struct Sample {
  Image image;
  LabelMap mask;
};

// Color jitter (image only), horizontal flip, scale jitter (bilinear image,
// nearest mask), pad bottom/right to at least crop_size, random crop.
// Deterministic for a fixed seed; the same number of random draws is made
// whatever the strengths are.
Sample augment(const Image& image, const LabelMap& mask,
               const AugmentConfig& cfg, std::uint64_t seed);

// Resize so the shorter side is `size`, then center-crop to size x size.
// Used when feeding full images to training without augmentation.
Sample fit_square(const Image& image, const LabelMap& mask, int size);

}  // namespace liquidseg

#endif  // LIQUIDSEG_AUGMENT_H_
