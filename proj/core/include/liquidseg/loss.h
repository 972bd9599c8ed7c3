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

#ifndef LIQUIDSEG_LOSS_H_
#define LIQUIDSEG_LOSS_H_

#include <cstdint>
#include <vector>

#include "liquidseg/boundary.h"
#include "liquidseg/hungarian.h"
#include "liquidseg/image.h"
#include "liquidseg/model.h"

namespace liquidseg {

// All pixels of one class. Masks are 0/1 over the label map's pixels.
struct Segment {
  std::uint8_t class_id = 0;
  std::vector<std::uint8_t> mask;
};

// One segment per liquid class present, in ascending class order.
std::vector<Segment> gt_to_segments(const LabelMap& mask);

struct LossWeights {
  double class_weight = 2.0;
  double bce_weight = 5.0;
  double dice_weight = 5.0;
  double dice_eps = 1.0;
  double boundary_weight = 200.0;  // omega
  bool operator==(const LossWeights&) const = default;
};

// Supervision for one image. Mask terms and the boundary term may live at
// different resolutions.
struct LossTargets {
  std::vector<Segment> segments;
  std::vector<std::uint8_t> valid;     // 0 where the label is ignore
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> boundary;  // 0/1
  std::vector<std::uint8_t> boundary_valid;
  int boundary_height = 0;
  int boundary_width = 0;
};

// From a full-resolution training mask: boundary band computed at full
// resolution (diagonal rule). Segments and validity are downsampled
// (nearest) to mask_size x mask_size, band and its validity to
// boundary_size x boundary_size. A size equal to the mask's keeps it as is.
LossTargets prepare_targets(const LabelMap& mask, int mask_size,
                            int boundary_size);
inline LossTargets prepare_targets(const LabelMap& mask, int size) {
  return prepare_targets(mask, size, size);
}

// cost[s, k] = w_cls * -log p_k(c_s) + w_bce * BCE(m_k, g_s)
//            + w_dice * Dice(m_k, g_s)
template <typename T>
CostMatrix match_cost(const PredictionSet<T>& pred,
                      const std::vector<Segment>& segments,
                      const std::vector<std::uint8_t>& valid,
                      const LossWeights& weights);

template <typename T>
struct LossBreakdown {
  Var<T> total;
  Var<T> mask_loss;      // L_m
  Var<T> boundary_loss;  // L_b (zero constant without boundary branch)
  Var<T> class_ce;
  Var<T> mask_bce;       // zero constant when there are no segments
  Var<T> mask_dice;
  MatchResult match;
};

// L_m: class CE over all K queries (unmatched -> no-object), plus BCE and
// dice averaged over matched segments. Sub-terms are reported unweighted.
template <typename T>
Var<T> mask_branch_loss(const PredictionSet<T>& pred,
                        const std::vector<Segment>& segments,
                        const std::vector<std::uint8_t>& valid,
                        const MatchResult& match, const LossWeights& weights,
                        LossBreakdown<T>* parts = nullptr);

// Mean BCE of max_k sigmoid(boundary_logits[k]) against the band.
template <typename T>
Var<T> boundary_loss(const Var<T>& boundary_logits,
                     const std::vector<std::uint8_t>& boundary,
                     const std::vector<std::uint8_t>& valid);

double total_loss(double mask_loss, double boundary_loss, double omega);

template <typename T>
Var<T> total_loss(const Var<T>& mask_loss, const Var<T>& boundary_loss,
                  double omega);

// Matches (unless `fixed_match` is given) and evaluates the full objective.
// Logits are bilinearly resized to the target resolution when it differs.
template <typename T>
LossBreakdown<T> compute_loss(const PredictionSet<T>& pred,
                              const LossTargets& targets,
                              const LossWeights& weights,
                              const MatchResult* fixed_match = nullptr);

}  // namespace liquidseg

#endif  // LIQUIDSEG_LOSS_H_
