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

#include "liquidseg/image.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace liquidseg {
namespace {

// Source coordinate and weights for one destination axis.
struct Tap {
  int lo = 0;
  int hi = 0;
  float w_hi = 0.0f;
};

std::vector<Tap> bilinear_taps(int src, int dst) {
  std::vector<Tap> taps(dst);
  const double ratio = static_cast<double>(src) / dst;
  for (int i = 0; i < dst; ++i) {
    double s = (i + 0.5) * ratio - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src - 1));
    const int lo = static_cast<int>(std::floor(s));
    taps[i].lo = lo;
    taps[i].hi = std::min(lo + 1, src - 1);
    taps[i].w_hi = static_cast<float>(s - lo);
  }
  return taps;
}

const std::vector<int> kPngParams = {cv::IMWRITE_PNG_COMPRESSION, 6};

}  // namespace

Image resize_bilinear(const Image& image, int height, int width) {
  if (height <= 0 || width <= 0) {
    throw std::invalid_argument("resize_bilinear: target size must be positive");
  }
  if (height == image.height && width == image.width) return image;
  const auto ty = bilinear_taps(image.height, height);
  const auto tx = bilinear_taps(image.width, width);
  Image out(height, width);
  for (int y = 0; y < height; ++y) {
    const Tap& a = ty[y];
    for (int x = 0; x < width; ++x) {
      const Tap& b = tx[x];
      for (int c = 0; c < 3; ++c) {
        const float top = image.at(a.lo, b.lo, c) * (1.0f - b.w_hi) +
                          image.at(a.lo, b.hi, c) * b.w_hi;
        const float bot = image.at(a.hi, b.lo, c) * (1.0f - b.w_hi) +
                          image.at(a.hi, b.hi, c) * b.w_hi;
        out.at(y, x, c) = top * (1.0f - a.w_hi) + bot * a.w_hi;
      }
    }
  }
  return out;
}

LabelMap resize_nearest(const LabelMap& mask, int height, int width) {
  if (height <= 0 || width <= 0) {
    throw std::invalid_argument("resize_nearest: target size must be positive");
  }
  if (height == mask.height && width == mask.width) return mask;
  LabelMap out(height, width);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(
        mask.height - 1,
        static_cast<int>((y + 0.5) * mask.height / static_cast<double>(height)));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(
          mask.width - 1,
          static_cast<int>((x + 0.5) * mask.width / static_cast<double>(width)));
      out.at(y, x) = mask.at(sy, sx);
    }
  }
  return out;
}

Image flip_horizontal(const Image& image) {
  Image out(image.height, image.width);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        out.at(y, x, c) = image.at(y, image.width - 1 - x, c);
      }
    }
  }
  return out;
}

LabelMap flip_horizontal(const LabelMap& mask) {
  LabelMap out(mask.height, mask.width);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      out.at(y, x) = mask.at(y, mask.width - 1 - x);
    }
  }
  return out;
}

Image read_image(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw ImageIoError("cannot read image " + path.string());
  Image out(bgr.rows, bgr.cols);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = row[x][2 - c] / 255.0f;
    }
  }
  return out;
}

void write_image(const std::filesystem::path& path, const Image& image) {
  cv::Mat bgr(image.height, image.width, CV_8UC3);
  for (int y = 0; y < image.height; ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        const float v = std::clamp(image.at(y, x, c), 0.0f, 1.0f);
        row[x][2 - c] = static_cast<unsigned char>(std::lround(v * 255.0f));
      }
    }
  }
  if (!cv::imwrite(path.string(), bgr, kPngParams)) {
    throw ImageIoError("cannot write image " + path.string());
  }
}

LabelMap read_label_map(const std::filesystem::path& path) {
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (m.empty()) throw ImageIoError("cannot read mask " + path.string());
  if (m.type() != CV_8UC1) {
    throw ImageIoError("mask " + path.string() +
                       " is not an 8-bit single-channel image");
  }
  LabelMap out(m.rows, m.cols);
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<unsigned char>(y);
    std::copy(row, row + m.cols, out.labels.begin() + static_cast<std::ptrdiff_t>(y) * m.cols);
  }
  return out;
}

void write_label_map(const std::filesystem::path& path, const LabelMap& mask) {
  cv::Mat m(mask.height, mask.width, CV_8UC1);
  for (int y = 0; y < mask.height; ++y) {
    std::copy(mask.labels.begin() + static_cast<std::ptrdiff_t>(y) * mask.width,
              mask.labels.begin() + static_cast<std::ptrdiff_t>(y + 1) * mask.width,
              m.ptr<unsigned char>(y));
  }
  if (!cv::imwrite(path.string(), m, kPngParams)) {
    throw ImageIoError("cannot write mask " + path.string());
  }
}

}  // namespace liquidseg
