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

#ifndef LIQUIDSEG_IMAGE_H_
#define LIQUIDSEG_IMAGE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

namespace liquidseg {

inline constexpr std::uint8_t kIgnoreLabel = 255;
inline constexpr int kNumLiquidClasses = 14;

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// H x W x 3 interleaved RGB, values in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  std::vector<float> pixels;

  Image() = default;
  Image(int h, int w, float fill = 0.0f)
      : height(h), width(w), pixels(static_cast<std::size_t>(h) * w * 3, fill) {}

  float& at(int y, int x, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  float at(int y, int x, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  bool operator==(const Image&) const = default;
};

// H x W label map: 0 background, 1..14 liquid classes, 255 ignore.
struct LabelMap {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> labels;

  LabelMap() = default;
  LabelMap(int h, int w, std::uint8_t fill = 0)
      : height(h), width(w), labels(static_cast<std::size_t>(h) * w, fill) {}

  std::uint8_t& at(int y, int x) {
    return labels[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t at(int y, int x) const {
    return labels[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t size() const { return labels.size(); }
  bool operator==(const LabelMap&) const = default;
};

// Pixel-center aligned bilinear resampling (align_corners = false).
Image resize_bilinear(const Image& image, int height, int width);

// Nearest-neighbor: source index floor((i + 0.5) * src / dst).
LabelMap resize_nearest(const LabelMap& mask, int height, int width);

Image flip_horizontal(const Image& image);
LabelMap flip_horizontal(const LabelMap& mask);

// Any format the codec layer reads (PNG, JPEG, ...); converted to RGB.
Image read_image(const std::filesystem::path& path);
// Lossless 8-bit RGB PNG.
void write_image(const std::filesystem::path& path, const Image& image);

// 8-bit single-channel PNG, values passed through verbatim.
LabelMap read_label_map(const std::filesystem::path& path);
void write_label_map(const std::filesystem::path& path, const LabelMap& mask);

}  // namespace liquidseg

#endif  // LIQUIDSEG_IMAGE_H_
