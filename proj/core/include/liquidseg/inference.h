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

#ifndef LIQUIDSEG_INFERENCE_H_
#define LIQUIDSEG_INFERENCE_H_

#include <functional>
#include <vector>

#include "liquidseg/image.h"
#include "liquidseg/model.h"

namespace liquidseg {

inline constexpr double kBackgroundThreshold = 0.5;

// Square windows along the longer side of the resized image.
struct TilePlan {
  int resized_height = 0;
  int resized_width = 0;
  int window = 0;
  int stride = 0;
  bool along_width = true;   // which axis the offsets run along
  std::vector<int> offsets;  // first 0, last flush with the far edge
};

// Shorter side resized to `window` (aspect preserved, longer side rounded),
// offsets at stride window / 2 with the final one clamped to the edge.
TilePlan plan_tiles(int height, int width, int window);

// Channel-major score planes; channel index == label. Channel 0
// (background) carries no score; background is decided by threshold.
struct ScoreMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> values;

  ScoreMap() = default;
  ScoreMap(int c, int h, int w)
      : channels(c), height(h), width(w),
        values(static_cast<std::size_t>(c) * h * w, 0.0f) {}
  float& at(int c, int y, int x) {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  float at(int c, int y, int x) const {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
};

// score(c, pixel) = sum_k softmax(class_logits[k])[c] * sigmoid(mask[k, pixel])
// for classes 1..C (no-object excluded). The second form first resizes the
// mask logits bilinearly to height x width, so the sigmoid is taken at the
// output resolution.
template <typename T>
ScoreMap query_class_scores(const PredictionSet<T>& pred);
template <typename T>
ScoreMap query_class_scores(const PredictionSet<T>& pred, int height, int width);

ScoreMap upsample_bilinear(const ScoreMap& scores, int height, int width);

// argmax over classes 1..C; background where the winning score is below
// `threshold`. Ties go to the lower label.
LabelMap labels_from_scores(const ScoreMap& scores,
                            double threshold = kBackgroundThreshold);

struct SemanticResult {
  ScoreMap scores;
  LabelMap labels;
};

template <typename T>
SemanticResult semantic_assemble(const PredictionSet<T>& pred, int height,
                                 int width,
                                 double threshold = kBackgroundThreshold);

// Maps one window x window image to window-resolution scores.
using WindowScorer = std::function<ScoreMap(const Image& window)>;

template <typename T>
WindowScorer model_scorer(const SegmentationModel<T>& model);

// Resize, tile, average window scores over the resized canvas, label, and
// resize labels (nearest) back to the input size. `canvas_out`, if given,
// receives the averaged resized-resolution scores.
LabelMap sliding_infer(const Image& image, const WindowScorer& scorer,
                       int window, double threshold = kBackgroundThreshold,
                       ScoreMap* canvas_out = nullptr);

// Palette visualization of a label map (background black).
Image colorize(const LabelMap& labels);

}  // namespace liquidseg

#endif  // LIQUIDSEG_INFERENCE_H_
