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

#ifndef LIQUIDSEG_MODEL_H_
#define LIQUIDSEG_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "liquidseg/image.h"
#include "liquidseg/layers.h"

namespace liquidseg {

struct ModelConfig {
  std::size_t patch_size = 16;
  std::size_t width = 1152;
  std::size_t backbone_depth = 20;  // L1
  std::size_t joint_depth = 4;      // L2
  std::size_t num_queries = 100;    // K
  std::size_t num_classes = kNumLiquidClasses;
  std::size_t num_heads = 8;
  std::size_t mlp_ratio = 4;
  double dropout = 0.2;
  std::size_t input_size = 512;     // S
  bool use_boundary_branch = true;
  bool use_boundary_cross_attention = true;

  // Throws std::invalid_argument describing the first violated constraint.
  void validate() const;

  std::size_t grid_size() const { return input_size / patch_size; }
  std::size_t num_patches() const { return grid_size() * grid_size(); }
  // Mask and boundary logits live at stride 4.
  std::size_t logit_size() const { return input_size / 4; }
  std::size_t upscale_stages() const;

  bool operator==(const ModelConfig&) const = default;
};

// Query-wise outputs of one forward pass.
template <typename T>
struct PredictionSet {
  Var<T> class_logits;     // [K, C + 1]; last column is no-object
  Var<T> mask_logits;      // [K, h * w]
  Var<T> boundary_logits;  // [K, h * w]; undefined without boundary branch
  std::size_t logit_height = 0;
  std::size_t logit_width = 0;

  bool has_boundary() const { return boundary_logits.defined(); }
};

// Q_m + MHA(LN(Q_m), LN(Q_b)): mask queries read the boundary queries.
template <typename T>
struct BoundaryCrossAttention {
  nn::LayerNorm<T> norm_mask;
  nn::LayerNorm<T> norm_boundary;
  nn::MultiHeadAttention<T> attn;

  static BoundaryCrossAttention init(std::size_t width, std::size_t num_heads,
                                     double dropout, Rng& rng);
  Var<T> operator()(const Var<T>& mask_queries, const Var<T>& boundary_queries,
                    const nn::ForwardContext& ctx,
                    std::vector<T>* weights_out = nullptr) const;
  void collect(const std::string& prefix, nn::ParameterList<T>& out) const;
};

// <mlp3(queries)[k], upscale(features)[pixel]> for every query and pixel.
// features is the [h*w, D] patch grid; result is [K, (h*2^n) * (w*2^n)].
template <typename T>
Var<T> spatial_logits(const Var<T>& queries, const Var<T>& features,
                      std::size_t grid_height, std::size_t grid_width,
                      const nn::Mlp3<T>& mlp, const nn::Upscaler<T>& upscaler);

template <typename T>
class SegmentationModel {
 public:
  SegmentationModel(const ModelConfig& config, std::uint64_t seed);
  // Parameters are shared handles; a copy would alias them.
  SegmentationModel(const SegmentationModel&) = delete;
  SegmentationModel& operator=(const SegmentationModel&) = delete;
  SegmentationModel(SegmentationModel&&) = default;
  SegmentationModel& operator=(SegmentationModel&&) = default;

  const ModelConfig& config() const { return config_; }

  // `image` must be input_size x input_size.
  PredictionSet<T> forward(const Image& image,
                           const nn::ForwardContext& ctx) const;

  // Canonical names, stable order.
  nn::ParameterList<T> parameters() const;

  nn::PatchEmbed<T> patch_embed;
  std::vector<nn::EncoderBlock<T>> backbone;
  // One block per joint stage, applied to both branches.
  std::vector<nn::EncoderBlock<T>> joint_blocks;
  std::vector<BoundaryCrossAttention<T>> cross_attention;
  Var<T> mask_queries;      // [K, D]
  Var<T> boundary_queries;  // [K, D]; undefined without boundary branch
  nn::LayerNorm<T> final_norm;
  nn::Linear<T> class_head;
  nn::Mlp3<T> mask_mlp;
  nn::Upscaler<T> mask_upscaler;
  nn::Mlp3<T> boundary_mlp;
  nn::Upscaler<T> boundary_upscaler;

 private:
  ModelConfig config_;
};

}  // namespace liquidseg

#endif  // LIQUIDSEG_MODEL_H_
