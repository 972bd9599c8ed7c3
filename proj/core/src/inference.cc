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

#include "liquidseg/inference.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "liquidseg/ops.h"

namespace liquidseg {

TilePlan plan_tiles(int height, int width, int window) {
  if (height < 1 || width < 1 || window < 2) {
    throw std::invalid_argument("plan_tiles: sizes must be positive");
  }
  TilePlan plan;
  plan.window = window;
  plan.stride = window / 2;
  plan.along_width = width >= height;
  const int shorter = std::min(height, width);
  const int longer = std::max(height, width);
  const int resized_longer = std::max(
      window, static_cast<int>(std::lround(static_cast<double>(longer) *
                                           window / shorter)));
  plan.resized_height = plan.along_width ? window : resized_longer;
  plan.resized_width = plan.along_width ? resized_longer : window;
  int offset = 0;
  while (offset + window < resized_longer) {
    plan.offsets.push_back(offset);
    offset += plan.stride;
  }
  plan.offsets.push_back(resized_longer - window);
  return plan;
}

template <typename T>
ScoreMap query_class_scores(const PredictionSet<T>& pred) {
  return query_class_scores(pred, static_cast<int>(pred.logit_height),
                            static_cast<int>(pred.logit_width));
}

template <typename T>
ScoreMap query_class_scores(const PredictionSet<T>& pred, int height, int width) {
  const std::size_t K = pred.class_logits.rows();
  const std::size_t C1 = pred.class_logits.cols();
  const int h = height;
  const int w = width;
  const std::size_t n = static_cast<std::size_t>(h) * w;
  if (pred.mask_logits.rows() != K ||
      pred.mask_logits.cols() != pred.logit_height * pred.logit_width) {
    throw ShapeError("query_class_scores: mask logits " +
                     shape_string(pred.mask_logits.shape()) +
                     " do not match " + std::to_string(K) + " queries at " +
                     std::to_string(h) + "x" + std::to_string(w));
  }
  const int C = static_cast<int>(C1) - 1;
  ScoreMap scores(C + 1, h, w);
  const auto logits = pred.class_logits.data();
  const Var<T> resized = ops::resize_bilinear_rows(
      Var<T>::constant(pred.mask_logits.value()), pred.logit_height,
      pred.logit_width, static_cast<std::size_t>(h), static_cast<std::size_t>(w));
  const auto masks = resized.data();
  std::vector<double> probs(C1);
  std::vector<double> sig(n);
  for (std::size_t k = 0; k < K; ++k) {
    double mx = -INFINITY;
    for (std::size_t c = 0; c < C1; ++c) mx = std::max(mx, double(logits[k * C1 + c]));
    double z = 0;
    for (std::size_t c = 0; c < C1; ++c) {
      probs[c] = std::exp(double(logits[k * C1 + c]) - mx);
      z += probs[c];
    }
    for (auto& p : probs) p /= z;
    for (std::size_t i = 0; i < n; ++i) {
      sig[i] = 1.0 / (1.0 + std::exp(-double(masks[k * n + i])));
    }
    for (int c = 0; c < C; ++c) {
      const double p = probs[c];
      float* plane = scores.values.data() + static_cast<std::size_t>(c + 1) * n;
      for (std::size_t i = 0; i < n; ++i) plane[i] += static_cast<float>(p * sig[i]);
    }
  }
  return scores;
}

ScoreMap upsample_bilinear(const ScoreMap& scores, int height, int width) {
  if (scores.height == height && scores.width == width) return scores;
  ScoreMap out(scores.channels, height, width);
  Image plane(scores.height, scores.width);
  // reuse the image resampler three channels at a time
  for (int c0 = 0; c0 < scores.channels; c0 += 3) {
    for (int y = 0; y < scores.height; ++y) {
      for (int x = 0; x < scores.width; ++x) {
        for (int j = 0; j < 3; ++j) {
          plane.at(y, x, j) = c0 + j < scores.channels ? scores.at(c0 + j, y, x) : 0.0f;
        }
      }
    }
    const Image up = resize_bilinear(plane, height, width);
    for (int j = 0; j < 3 && c0 + j < scores.channels; ++j) {
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) out.at(c0 + j, y, x) = up.at(y, x, j);
      }
    }
  }
  return out;
}

LabelMap labels_from_scores(const ScoreMap& scores, double threshold) {
  LabelMap labels(scores.height, scores.width, 0);
  for (int y = 0; y < scores.height; ++y) {
    for (int x = 0; x < scores.width; ++x) {
      int best = 0;
      float best_score = -INFINITY;
      for (int c = 1; c < scores.channels; ++c) {
        if (scores.at(c, y, x) > best_score) {
          best_score = scores.at(c, y, x);
          best = c;
        }
      }
      labels.at(y, x) = (best > 0 && best_score >= threshold)
                            ? static_cast<std::uint8_t>(best)
                            : 0;
    }
  }
  return labels;
}

template <typename T>
SemanticResult semantic_assemble(const PredictionSet<T>& pred, int height,
                                 int width, double threshold) {
  SemanticResult r;
  r.scores = query_class_scores(pred, height, width);
  r.labels = labels_from_scores(r.scores, threshold);
  return r;
}

template <typename T>
WindowScorer model_scorer(const SegmentationModel<T>& model) {
  return [&model](const Image& window) {
    nn::ForwardContext ctx;
    const PredictionSet<T> pred = model.forward(window, ctx);
    return query_class_scores(pred, window.height, window.width);
  };
}

LabelMap sliding_infer(const Image& image, const WindowScorer& scorer,
                       int window, double threshold, ScoreMap* canvas_out) {
  const TilePlan plan = plan_tiles(image.height, image.width, window);
  const Image resized =
      resize_bilinear(image, plan.resized_height, plan.resized_width);
  ScoreMap canvas;
  std::vector<int> coverage(
      static_cast<std::size_t>(plan.resized_height) * plan.resized_width, 0);
  for (int offset : plan.offsets) {
    const int oy = plan.along_width ? 0 : offset;
    const int ox = plan.along_width ? offset : 0;
    Image tile(window, window);
    for (int y = 0; y < window; ++y) {
      for (int x = 0; x < window; ++x) {
        for (int c = 0; c < 3; ++c) tile.at(y, x, c) = resized.at(oy + y, ox + x, c);
      }
    }
    const ScoreMap s = scorer(tile);
    if (s.height != window || s.width != window) {
      throw std::runtime_error("sliding_infer: scorer returned " +
                               std::to_string(s.height) + "x" +
                               std::to_string(s.width) + " for a " +
                               std::to_string(window) + " window");
    }
    if (canvas.channels == 0) {
      canvas = ScoreMap(s.channels, plan.resized_height, plan.resized_width);
    }
    for (int c = 0; c < s.channels; ++c) {
      for (int y = 0; y < window; ++y) {
        for (int x = 0; x < window; ++x) canvas.at(c, oy + y, ox + x) += s.at(c, y, x);
      }
    }
    for (int y = 0; y < window; ++y) {
      for (int x = 0; x < window; ++x) {
        ++coverage[static_cast<std::size_t>(oy + y) * plan.resized_width + ox + x];
      }
    }
  }
  const std::size_t n = coverage.size();
  for (int c = 0; c < canvas.channels; ++c) {
    float* plane = canvas.values.data() + static_cast<std::size_t>(c) * n;
    for (std::size_t i = 0; i < n; ++i) {
      if (coverage[i] > 1) plane[i] /= static_cast<float>(coverage[i]);
    }
  }
  LabelMap labels = labels_from_scores(canvas, threshold);
  if (canvas_out) *canvas_out = std::move(canvas);
  return resize_nearest(labels, image.height, image.width);
}

Image colorize(const LabelMap& labels) {
  static const float kPalette[15][3] = {
      {0.00f, 0.00f, 0.00f}, {0.12f, 0.47f, 0.71f}, {0.55f, 0.09f, 0.20f},
      {1.00f, 0.60f, 0.10f}, {0.89f, 0.47f, 0.76f}, {0.74f, 0.74f, 0.13f},
      {0.44f, 0.26f, 0.13f}, {0.60f, 0.80f, 0.20f}, {0.30f, 0.20f, 0.50f},
      {0.09f, 0.75f, 0.81f}, {0.84f, 0.15f, 0.16f}, {0.95f, 0.95f, 0.90f},
      {0.70f, 0.55f, 0.30f}, {0.95f, 0.75f, 0.10f}, {0.50f, 0.50f, 0.50f}};
  Image out(labels.height, labels.width);
  for (int y = 0; y < labels.height; ++y) {
    for (int x = 0; x < labels.width; ++x) {
      const int l = labels.at(y, x);
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = l < 15 ? kPalette[l][c] : 1.0f;
    }
  }
  return out;
}

template ScoreMap query_class_scores(const PredictionSet<float>&);
template ScoreMap query_class_scores(const PredictionSet<double>&);
template ScoreMap query_class_scores(const PredictionSet<float>&, int, int);
template ScoreMap query_class_scores(const PredictionSet<double>&, int, int);
template SemanticResult semantic_assemble(const PredictionSet<float>&, int, int,
                                          double);
template SemanticResult semantic_assemble(const PredictionSet<double>&, int,
                                          int, double);
template WindowScorer model_scorer(const SegmentationModel<float>&);
template WindowScorer model_scorer(const SegmentationModel<double>&);

}  // namespace liquidseg
