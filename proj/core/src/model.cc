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

#include "liquidseg/model.h"

#include <stdexcept>
#include <string>

namespace liquidseg {
namespace {

void check(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("invalid model config: " + what);
}

}  // namespace

void ModelConfig::validate() const {
  check(backbone_depth >= 1, "backbone_depth must be >= 1");
  check(joint_depth >= 1, "joint_depth must be >= 1");
  check(num_queries >= 1, "num_queries must be >= 1");
  check(num_classes >= 1 && num_classes <= 254,
        "num_classes must be in [1, 254]");
  check(width >= 1, "width must be >= 1");
  check(num_heads >= 1 && width % num_heads == 0,
        "width " + std::to_string(width) + " must be divisible by num_heads " +
            std::to_string(num_heads));
  check(mlp_ratio >= 1, "mlp_ratio must be >= 1");
  check(dropout >= 0.0 && dropout < 1.0, "dropout must be in [0, 1)");
  check(patch_size >= 4 && patch_size % 4 == 0 &&
            ((patch_size / 4) & (patch_size / 4 - 1)) == 0,
        "patch_size must be 4 times a power of two, got " +
            std::to_string(patch_size));
  check(input_size >= patch_size && input_size % patch_size == 0,
        "input_size " + std::to_string(input_size) +
            " must be divisible by patch_size " + std::to_string(patch_size));
  check(!use_boundary_cross_attention || use_boundary_branch,
        "use_boundary_cross_attention requires use_boundary_branch");
}

std::size_t ModelConfig::upscale_stages() const {
  std::size_t n = 0;
  for (std::size_t s = patch_size; s > 4; s /= 2) ++n;
  return n;
}

template <typename T>
BoundaryCrossAttention<T> BoundaryCrossAttention<T>::init(
    std::size_t width, std::size_t num_heads, double dropout, Rng& rng) {
  return {nn::LayerNorm<T>::init(width), nn::LayerNorm<T>::init(width),
          nn::MultiHeadAttention<T>::init(width, num_heads, dropout, rng)};
}

template <typename T>
Var<T> BoundaryCrossAttention<T>::operator()(
    const Var<T>& mask_queries, const Var<T>& boundary_queries,
    const nn::ForwardContext& ctx, std::vector<T>* weights_out) const {
  if (mask_queries.shape() != boundary_queries.shape()) {
    throw ShapeError("boundary cross-attention: query sets " +
                     shape_string(mask_queries.shape()) + " and " +
                     shape_string(boundary_queries.shape()) + " differ");
  }
  Var<T> attended = attn(norm_mask(mask_queries),
                         norm_boundary(boundary_queries), ctx, weights_out);
  return ops::add(mask_queries, attended);
}

template <typename T>
void BoundaryCrossAttention<T>::collect(const std::string& prefix,
                                        nn::ParameterList<T>& out) const {
  norm_mask.collect(prefix + ".norm_mask", out, -1);
  norm_boundary.collect(prefix + ".norm_boundary", out, -1);
  attn.collect(prefix + ".attn", out, -1);
}

template <typename T>
Var<T> spatial_logits(const Var<T>& queries, const Var<T>& features,
                      std::size_t grid_height, std::size_t grid_width,
                      const nn::Mlp3<T>& mlp, const nn::Upscaler<T>& upscaler) {
  if (features.rows() != grid_height * grid_width) {
    throw ShapeError("mask module: " + std::to_string(features.rows()) +
                     " feature rows do not form a " +
                     std::to_string(grid_height) + "x" +
                     std::to_string(grid_width) + " grid");
  }
  return ops::matmul_nt(mlp(queries), upscaler(features, grid_height, grid_width));
}

template <typename T>
SegmentationModel<T>::SegmentationModel(const ModelConfig& config,
                                        std::uint64_t seed)
    : config_(config) {
  config_.validate();
  Rng rng(seed);
  const std::size_t D = config_.width;
  const std::size_t K = config_.num_queries;
  patch_embed = nn::PatchEmbed<T>::init(config_.patch_size,
                                        config_.num_patches(), D, rng);
  for (std::size_t i = 0; i < config_.backbone_depth; ++i) {
    backbone.push_back(nn::EncoderBlock<T>::init(
        D, config_.num_heads, config_.mlp_ratio, config_.dropout, rng));
  }
  for (std::size_t i = 0; i < config_.joint_depth; ++i) {
    joint_blocks.push_back(nn::EncoderBlock<T>::init(
        D, config_.num_heads, config_.mlp_ratio, config_.dropout, rng));
  }
  auto init_queries = [&] {
    Tensor<T> t(Shape{K, D});
    for (auto& v : t.data) v = static_cast<T>(rng.truncated_normal(0.02));
    return Var<T>::parameter(std::move(t));
  };
  mask_queries = init_queries();
  final_norm = nn::LayerNorm<T>::init(D);
  class_head = nn::Linear<T>::init(D, config_.num_classes + 1, rng);
  mask_mlp = nn::Mlp3<T>::init(D, rng);
  mask_upscaler = nn::Upscaler<T>::init(config_.upscale_stages(), D, rng);
  if (config_.use_boundary_branch) {
    boundary_queries = init_queries();
    boundary_mlp = nn::Mlp3<T>::init(D, rng);
    boundary_upscaler = nn::Upscaler<T>::init(config_.upscale_stages(), D, rng);
  }
  if (config_.use_boundary_cross_attention) {
    for (std::size_t i = 0; i < config_.joint_depth; ++i) {
      cross_attention.push_back(BoundaryCrossAttention<T>::init(
          D, config_.num_heads, config_.dropout, rng));
    }
  }
}

template <typename T>
PredictionSet<T> SegmentationModel<T>::forward(
    const Image& image, const nn::ForwardContext& ctx) const {
  const auto S = static_cast<int>(config_.input_size);
  if (image.height != S || image.width != S) {
    throw ShapeError("model expects a " + std::to_string(S) + "x" +
                     std::to_string(S) + " image, got " +
                     std::to_string(image.height) + "x" +
                     std::to_string(image.width));
  }
  const std::size_t K = config_.num_queries;
  const std::size_t grid = config_.grid_size();

  Var<T> features = patch_embed(image);
  for (const auto& block : backbone) features = block(features, ctx);

  // branch split: each branch gets its own copy of the shared features
  Var<T> mask_tokens = ops::concat_rows(mask_queries, features);
  Var<T> boundary_tokens;
  if (config_.use_boundary_branch) {
    boundary_tokens = ops::concat_rows(boundary_queries, features);
  }
  const std::size_t n_tokens = mask_tokens.rows();
  for (std::size_t stage = 0; stage < joint_blocks.size(); ++stage) {
    if (config_.use_boundary_cross_attention) {
      Var<T> qm = ops::slice_rows(mask_tokens, 0, K);
      Var<T> qb = ops::slice_rows(boundary_tokens, 0, K);
      mask_tokens = ops::concat_rows(cross_attention[stage](qm, qb, ctx),
                                     ops::slice_rows(mask_tokens, K, n_tokens));
    }
    mask_tokens = joint_blocks[stage](mask_tokens, ctx);
    if (config_.use_boundary_branch) {
      boundary_tokens = joint_blocks[stage](boundary_tokens, ctx);
    }
  }

  PredictionSet<T> pred;
  pred.logit_height = pred.logit_width = config_.logit_size();
  mask_tokens = final_norm(mask_tokens);
  Var<T> mq = ops::slice_rows(mask_tokens, 0, K);
  pred.class_logits = class_head(mq);
  pred.mask_logits =
      spatial_logits(mq, ops::slice_rows(mask_tokens, K, n_tokens), grid, grid,
                     mask_mlp, mask_upscaler);
  if (config_.use_boundary_branch) {
    boundary_tokens = final_norm(boundary_tokens);
    pred.boundary_logits = spatial_logits(
        ops::slice_rows(boundary_tokens, 0, K),
        ops::slice_rows(boundary_tokens, K, n_tokens), grid, grid,
        boundary_mlp, boundary_upscaler);
  }
  return pred;
}

template <typename T>
nn::ParameterList<T> SegmentationModel<T>::parameters() const {
  nn::ParameterList<T> out;
  const int L1 = static_cast<int>(backbone.size());
  patch_embed.collect("patch_embed", out, L1);
  for (int i = 0; i < L1; ++i) {
    backbone[i].collect("backbone." + std::to_string(i), out, L1 - 1 - i);
  }
  for (std::size_t i = 0; i < joint_blocks.size(); ++i) {
    joint_blocks[i].collect("joint." + std::to_string(i), out, -1);
  }
  for (std::size_t i = 0; i < cross_attention.size(); ++i) {
    cross_attention[i].collect("cross_attention." + std::to_string(i), out);
  }
  out.push_back({"mask_queries", mask_queries, -1, false});
  if (boundary_queries.defined()) {
    out.push_back({"boundary_queries", boundary_queries, -1, false});
  }
  final_norm.collect("final_norm", out, -1);
  class_head.collect("class_head", out, -1);
  mask_mlp.collect("mask_mlp", out, -1);
  mask_upscaler.collect("mask_upscaler", out, -1);
  if (config_.use_boundary_branch) {
    boundary_mlp.collect("boundary_mlp", out, -1);
    boundary_upscaler.collect("boundary_upscaler", out, -1);
  }
  return out;
}

template struct BoundaryCrossAttention<float>;
template struct BoundaryCrossAttention<double>;
template Var<float> spatial_logits(const Var<float>&, const Var<float>&,
                                   std::size_t, std::size_t,
                                   const nn::Mlp3<float>&,
                                   const nn::Upscaler<float>&);
template Var<double> spatial_logits(const Var<double>&, const Var<double>&,
                                    std::size_t, std::size_t,
                                    const nn::Mlp3<double>&,
                                    const nn::Upscaler<double>&);
template class SegmentationModel<float>;
template class SegmentationModel<double>;

}  // namespace liquidseg
