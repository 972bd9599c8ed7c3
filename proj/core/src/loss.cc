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

#include "liquidseg/loss.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace liquidseg {
namespace {

double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

template <typename T>
Var<T> zero_scalar() {
  return Var<T>::constant(Tensor<T>(Shape{1}, {T{0}}));
}

}  // namespace

std::vector<Segment> gt_to_segments(const LabelMap& mask) {
  std::array<bool, 256> present{};
  for (std::uint8_t l : mask.labels) present[l] = true;
  std::vector<Segment> out;
  for (int c = 1; c < 255; ++c) {
    if (!present[c]) continue;
    Segment s;
    s.class_id = static_cast<std::uint8_t>(c);
    s.mask.resize(mask.labels.size());
    for (std::size_t i = 0; i < mask.labels.size(); ++i) {
      s.mask[i] = mask.labels[i] == c ? 1 : 0;
    }
    out.push_back(std::move(s));
  }
  return out;
}

LossTargets prepare_targets(const LabelMap& mask, int mask_size,
                            int boundary_size) {
  const BoundaryMask band = boundary_from_mask(
      mask, boundary_thickness(mask.height, mask.width));
  LabelMap band_map(mask.height, mask.width);
  band_map.labels = band.values;
  auto validity = [](const LabelMap& m) {
    std::vector<std::uint8_t> v(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) v[i] = m.labels[i] != kIgnoreLabel;
    return v;
  };

  LossTargets t;
  const LabelMap small = resize_nearest(mask, mask_size, mask_size);
  t.height = t.width = mask_size;
  t.segments = gt_to_segments(small);
  t.valid = validity(small);
  t.boundary_height = t.boundary_width = boundary_size;
  t.boundary = resize_nearest(band_map, boundary_size, boundary_size).labels;
  t.boundary_valid = boundary_size == mask_size
                         ? t.valid
                         : validity(resize_nearest(mask, boundary_size, boundary_size));
  return t;
}

template <typename T>
CostMatrix match_cost(const PredictionSet<T>& pred,
                      const std::vector<Segment>& segments,
                      const std::vector<std::uint8_t>& valid,
                      const LossWeights& weights) {
  const std::size_t K = pred.class_logits.rows();
  const std::size_t C1 = pred.class_logits.cols();
  const std::size_t n = pred.mask_logits.cols();
  if (!valid.empty() && valid.size() != n) {
    throw ShapeError("match_cost: validity mask size mismatch");
  }
  const auto logits = pred.class_logits.data();
  const auto masks = pred.mask_logits.data();

  // per-query log-softmax and per-pixel sigmoid terms
  std::vector<double> log_probs(K * C1);
  for (std::size_t k = 0; k < K; ++k) {
    double mx = -INFINITY;
    for (std::size_t c = 0; c < C1; ++c) mx = std::max(mx, double(logits[k * C1 + c]));
    double z = 0;
    for (std::size_t c = 0; c < C1; ++c) z += std::exp(double(logits[k * C1 + c]) - mx);
    const double lz = std::log(z) + mx;
    for (std::size_t c = 0; c < C1; ++c) log_probs[k * C1 + c] = double(logits[k * C1 + c]) - lz;
  }

  CostMatrix cost(segments.size(), K);
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& seg = segments[s];
    if (seg.mask.size() != n) {
      throw ShapeError("match_cost: segment mask has " +
                       std::to_string(seg.mask.size()) + " pixels, logits " +
                       std::to_string(n));
    }
    if (seg.class_id < 1 || seg.class_id >= C1) {
      throw std::invalid_argument("match_cost: segment class " +
                                  std::to_string(seg.class_id) +
                                  " outside the model's classes");
    }
    for (std::size_t k = 0; k < K; ++k) {
      double bce = 0, inter = 0, psum = 0, gsum = 0;
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!valid.empty() && !valid[i]) continue;
        const double x = masks[k * n + i];
        const double g = seg.mask[i];
        const double p = sigmoid(x);
        bce += softplus(x) - x * g;
        inter += p * g;
        psum += p;
        gsum += g;
        ++count;
      }
      if (count) bce /= double(count);
      const double dice = 1.0 - (2.0 * inter + weights.dice_eps) /
                                    (psum + gsum + weights.dice_eps);
      const double ce = -log_probs[k * C1 + (seg.class_id - 1)];
      cost.at(s, k) = weights.class_weight * ce + weights.bce_weight * bce +
                      weights.dice_weight * dice;
    }
  }
  return cost;
}

template <typename T>
Var<T> mask_branch_loss(const PredictionSet<T>& pred,
                        const std::vector<Segment>& segments,
                        const std::vector<std::uint8_t>& valid,
                        const MatchResult& match, const LossWeights& weights,
                        LossBreakdown<T>* parts) {
  const std::size_t K = pred.class_logits.rows();
  const std::size_t no_object = pred.class_logits.cols() - 1;
  if (match.assignment.size() != segments.size()) {
    throw std::invalid_argument("mask_branch_loss: matching covers " +
                                std::to_string(match.assignment.size()) +
                                " of " + std::to_string(segments.size()) +
                                " segments");
  }
  std::vector<std::size_t> targets(K, no_object);
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const std::size_t k = match.assignment[s];
    if (k >= K || targets[k] != no_object) {
      throw std::invalid_argument("mask_branch_loss: matching is not injective");
    }
    targets[k] = segments[s].class_id - 1;
  }
  Var<T> ce = ops::softmax_cross_entropy(pred.class_logits, targets);

  Var<T> bce = zero_scalar<T>();
  Var<T> dice = zero_scalar<T>();
  if (!segments.empty()) {
    const T inv = T{1} / T(segments.size());
    Var<T> bce_sum, dice_sum;
    for (std::size_t s = 0; s < segments.size(); ++s) {
      const std::size_t k = match.assignment[s];
      Var<T> row = ops::slice_rows(pred.mask_logits, k, k + 1);
      Var<T> b = ops::sigmoid_bce(row, segments[s].mask, valid);
      Var<T> d = ops::dice_loss(row, segments[s].mask, valid,
                                static_cast<T>(weights.dice_eps));
      bce_sum = bce_sum.defined() ? ops::add(bce_sum, b) : b;
      dice_sum = dice_sum.defined() ? ops::add(dice_sum, d) : d;
    }
    bce = ops::scale(bce_sum, inv);
    dice = ops::scale(dice_sum, inv);
  }
  Var<T> loss = ops::add(
      ops::add(ops::scale(ce, static_cast<T>(weights.class_weight)),
               ops::scale(bce, static_cast<T>(weights.bce_weight))),
      ops::scale(dice, static_cast<T>(weights.dice_weight)));
  if (parts) {
    parts->class_ce = ce;
    parts->mask_bce = bce;
    parts->mask_dice = dice;
    parts->mask_loss = loss;
  }
  return loss;
}

template <typename T>
Var<T> boundary_loss(const Var<T>& boundary_logits,
                     const std::vector<std::uint8_t>& boundary,
                     const std::vector<std::uint8_t>& valid) {
  return ops::max_sigmoid_bce(boundary_logits, boundary, valid);
}

double total_loss(double mask_loss, double boundary_loss, double omega) {
  if (omega < 0) throw std::invalid_argument("total_loss: omega must be >= 0");
  return mask_loss + omega * boundary_loss;
}

template <typename T>
Var<T> total_loss(const Var<T>& mask_loss, const Var<T>& boundary_loss,
                  double omega) {
  if (omega < 0) throw std::invalid_argument("total_loss: omega must be >= 0");
  return ops::add(mask_loss, ops::scale(boundary_loss, static_cast<T>(omega)));
}

template <typename T>
LossBreakdown<T> compute_loss(const PredictionSet<T>& pred,
                              const LossTargets& targets,
                              const LossWeights& weights,
                              const MatchResult* fixed_match) {
  const std::size_t h = pred.logit_height;
  const std::size_t w = pred.logit_width;
  auto at_resolution = [&](const Var<T>& logits, int th, int tw) {
    const auto n = static_cast<std::size_t>(th) * static_cast<std::size_t>(tw);
    if (logits.cols() == n) return logits;
    if (logits.cols() != h * w) {
      throw ShapeError("compute_loss: targets have " + std::to_string(n) +
                       " pixels, logits " + std::to_string(logits.cols()));
    }
    return ops::resize_bilinear_rows(logits, h, w, static_cast<std::size_t>(th),
                                     static_cast<std::size_t>(tw));
  };
  PredictionSet<T> p = pred;
  p.mask_logits = at_resolution(pred.mask_logits, targets.height, targets.width);

  LossBreakdown<T> out;
  out.match = fixed_match
                  ? *fixed_match
                  : hungarian_match(match_cost(p, targets.segments,
                                               targets.valid, weights));
  mask_branch_loss(p, targets.segments, targets.valid, out.match, weights,
                   &out);
  out.boundary_loss =
      pred.has_boundary()
          ? boundary_loss(at_resolution(pred.boundary_logits,
                                        targets.boundary_height,
                                        targets.boundary_width),
                          targets.boundary, targets.boundary_valid)
          : zero_scalar<T>();
  out.total = total_loss(out.mask_loss, out.boundary_loss,
                         weights.boundary_weight);
  return out;
}

#define LIQUIDSEG_INSTANTIATE_LOSS(T)                                        \
  template CostMatrix match_cost(const PredictionSet<T>&,                    \
                                 const std::vector<Segment>&,                \
                                 const std::vector<std::uint8_t>&,           \
                                 const LossWeights&);                        \
  template Var<T> mask_branch_loss(                                          \
      const PredictionSet<T>&, const std::vector<Segment>&,                  \
      const std::vector<std::uint8_t>&, const MatchResult&,                  \
      const LossWeights&, LossBreakdown<T>*);                                \
  template Var<T> boundary_loss(const Var<T>&,                               \
                                const std::vector<std::uint8_t>&,            \
                                const std::vector<std::uint8_t>&);           \
  template Var<T> total_loss(const Var<T>&, const Var<T>&, double);          \
  template LossBreakdown<T> compute_loss(const PredictionSet<T>&,            \
                                         const LossTargets&,                 \
                                         const LossWeights&,                 \
                                         const MatchResult*);

LIQUIDSEG_INSTANTIATE_LOSS(float)
LIQUIDSEG_INSTANTIATE_LOSS(double)

#undef LIQUIDSEG_INSTANTIATE_LOSS

}  // namespace liquidseg
