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

#include "liquidseg/layers.h"

#include <cmath>
#include <string>

namespace liquidseg::nn {
namespace {

constexpr double kInitStd = 0.02;

template <typename T>
Var<T> truncated_normal(Shape shape, Rng& rng) {
  Tensor<T> t(std::move(shape));
  for (auto& v : t.data) v = static_cast<T>(rng.truncated_normal(kInitStd));
  return Var<T>::parameter(std::move(t));
}

template <typename T>
Var<T> filled(Shape shape, T value) {
  return Var<T>::parameter(Tensor<T>::filled(std::move(shape), value));
}

}  // namespace

template <typename T>
Linear<T> Linear<T>::init(std::size_t in, std::size_t out, Rng& rng) {
  return {truncated_normal<T>({out, in}, rng), filled<T>({out}, T{0})};
}

template <typename T>
Var<T> Linear<T>::operator()(const Var<T>& x) const {
  return ops::linear(x, weight, bias);
}

template <typename T>
void Linear<T>::collect(const std::string& prefix, ParameterList<T>& out,
                        int lr_depth) const {
  out.push_back({prefix + ".weight", weight, lr_depth, true});
  out.push_back({prefix + ".bias", bias, lr_depth, false});
}

template <typename T>
LayerNorm<T> LayerNorm<T>::init(std::size_t width) {
  return {filled<T>({width}, T{1}), filled<T>({width}, T{0}), T(1e-6)};
}

template <typename T>
Var<T> LayerNorm<T>::operator()(const Var<T>& x) const {
  return ops::layer_norm(x, gain, shift, eps);
}

template <typename T>
void LayerNorm<T>::collect(const std::string& prefix, ParameterList<T>& out,
                           int lr_depth) const {
  out.push_back({prefix + ".gain", gain, lr_depth, false});
  out.push_back({prefix + ".shift", shift, lr_depth, false});
}

template <typename T>
MultiHeadAttention<T> MultiHeadAttention<T>::init(std::size_t width,
                                                  std::size_t num_heads,
                                                  double dropout, Rng& rng) {
  if (num_heads == 0 || width % num_heads != 0) {
    throw ShapeError("attention width " + std::to_string(width) +
                     " is not divisible by " + std::to_string(num_heads) +
                     " heads");
  }
  MultiHeadAttention a;
  a.num_heads = num_heads;
  a.dropout = dropout;
  a.q = Linear<T>::init(width, width, rng);
  a.k = Linear<T>::init(width, width, rng);
  a.v = Linear<T>::init(width, width, rng);
  a.out = Linear<T>::init(width, width, rng);
  return a;
}

template <typename T>
Var<T> MultiHeadAttention<T>::operator()(const Var<T>& q_in,
                                         const Var<T>& kv_in,
                                         const ForwardContext& ctx,
                                         std::vector<T>* weights_out) const {
  ops::AttentionOptions opt;
  opt.num_heads = num_heads;
  opt.dropout = dropout;
  opt.training = ctx.training;
  opt.rng = ctx.rng;
  Var<T> attended =
      ops::scaled_dot_attention(q(q_in), k(kv_in), v(kv_in), opt, weights_out);
  return out(attended);
}

template <typename T>
void MultiHeadAttention<T>::collect(const std::string& prefix,
                                    ParameterList<T>& out_list,
                                    int lr_depth) const {
  q.collect(prefix + ".q", out_list, lr_depth);
  k.collect(prefix + ".k", out_list, lr_depth);
  v.collect(prefix + ".v", out_list, lr_depth);
  out.collect(prefix + ".out", out_list, lr_depth);
}

template <typename T>
EncoderBlock<T> EncoderBlock<T>::init(std::size_t width, std::size_t num_heads,
                                      std::size_t mlp_ratio, double dropout,
                                      Rng& rng) {
  EncoderBlock b;
  b.norm1 = LayerNorm<T>::init(width);
  b.attn = MultiHeadAttention<T>::init(width, num_heads, dropout, rng);
  b.norm2 = LayerNorm<T>::init(width);
  b.fc1 = Linear<T>::init(width, width * mlp_ratio, rng);
  b.fc2 = Linear<T>::init(width * mlp_ratio, width, rng);
  return b;
}

template <typename T>
Var<T> EncoderBlock<T>::operator()(const Var<T>& tokens,
                                   const ForwardContext& ctx) const {
  Var<T> h = norm1(tokens);
  Var<T> x = ops::add(tokens, attn(h, h, ctx));
  return ops::add(x, fc2(ops::gelu(fc1(norm2(x)))));
}

template <typename T>
void EncoderBlock<T>::collect(const std::string& prefix, ParameterList<T>& out,
                              int lr_depth) const {
  norm1.collect(prefix + ".norm1", out, lr_depth);
  attn.collect(prefix + ".attn", out, lr_depth);
  norm2.collect(prefix + ".norm2", out, lr_depth);
  fc1.collect(prefix + ".fc1", out, lr_depth);
  fc2.collect(prefix + ".fc2", out, lr_depth);
}

template <typename T>
Mlp3<T> Mlp3<T>::init(std::size_t width, Rng& rng) {
  return {Linear<T>::init(width, width, rng), Linear<T>::init(width, width, rng),
          Linear<T>::init(width, width, rng)};
}

template <typename T>
Var<T> Mlp3<T>::operator()(const Var<T>& x) const {
  return l3(ops::relu(l2(ops::relu(l1(x)))));
}

template <typename T>
void Mlp3<T>::collect(const std::string& prefix, ParameterList<T>& out,
                      int lr_depth) const {
  l1.collect(prefix + ".0", out, lr_depth);
  l2.collect(prefix + ".1", out, lr_depth);
  l3.collect(prefix + ".2", out, lr_depth);
}

template <typename T>
Tensor<T> extract_patches(const Image& image, std::size_t patch_size) {
  const auto P = static_cast<int>(patch_size);
  if (P <= 0 || image.height % P != 0 || image.width % P != 0) {
    throw ShapeError("patch_embed: image " + std::to_string(image.height) +
                     "x" + std::to_string(image.width) +
                     " is not divisible into " + std::to_string(P) + "x" +
                     std::to_string(P) + " patches");
  }
  const int gh = image.height / P;
  const int gw = image.width / P;
  const std::size_t dim = patch_size * patch_size * 3;
  Tensor<T> patches(Shape{static_cast<std::size_t>(gh * gw), dim});
  for (int py = 0; py < gh; ++py) {
    for (int px = 0; px < gw; ++px) {
      T* dst = patches.data.data() + static_cast<std::size_t>(py * gw + px) * dim;
      std::size_t i = 0;
      for (int y = 0; y < P; ++y) {
        for (int x = 0; x < P; ++x) {
          for (int c = 0; c < 3; ++c) {
            dst[i++] = static_cast<T>(image.at(py * P + y, px * P + x, c));
          }
        }
      }
    }
  }
  return patches;
}

template <typename T>
PatchEmbed<T> PatchEmbed<T>::init(std::size_t patch_size,
                                  std::size_t num_patches, std::size_t width,
                                  Rng& rng) {
  PatchEmbed p;
  p.patch_size = patch_size;
  p.proj = Linear<T>::init(patch_size * patch_size * 3, width, rng);
  p.pos_embed = truncated_normal<T>({num_patches, width}, rng);
  return p;
}

template <typename T>
Var<T> PatchEmbed<T>::operator()(const Image& image) const {
  Var<T> patches = Var<T>::constant(extract_patches<T>(image, patch_size));
  if (patches.rows() != pos_embed.rows()) {
    throw ShapeError("patch_embed: image yields " +
                     std::to_string(patches.rows()) + " patches but the " +
                     "positional embedding has " +
                     std::to_string(pos_embed.rows()));
  }
  return ops::add(proj(patches), pos_embed);
}

template <typename T>
void PatchEmbed<T>::collect(const std::string& prefix, ParameterList<T>& out,
                            int lr_depth) const {
  proj.collect(prefix + ".proj", out, lr_depth);
  out.push_back({prefix + ".pos_embed", pos_embed, lr_depth, false});
}

template <typename T>
UpscaleStage<T> UpscaleStage<T>::init(std::size_t width, Rng& rng) {
  return {truncated_normal<T>({4 * width, width}, rng),
          filled<T>({width}, T{0}), LayerNorm<T>::init(width)};
}

template <typename T>
Var<T> UpscaleStage<T>::operator()(const Var<T>& grid, std::size_t height,
                                   std::size_t width) const {
  Var<T> up = ops::pixel_shuffle2(ops::matmul_nt(grid, weight), height, width);
  return norm(ops::gelu(ops::add_bias(up, bias)));
}

template <typename T>
void UpscaleStage<T>::collect(const std::string& prefix, ParameterList<T>& out,
                              int lr_depth) const {
  out.push_back({prefix + ".weight", weight, lr_depth, true});
  out.push_back({prefix + ".bias", bias, lr_depth, false});
  norm.collect(prefix + ".norm", out, lr_depth);
}

template <typename T>
Upscaler<T> Upscaler<T>::init(std::size_t num_stages, std::size_t width,
                              Rng& rng) {
  Upscaler u;
  for (std::size_t i = 0; i < num_stages; ++i) {
    u.stages.push_back(UpscaleStage<T>::init(width, rng));
  }
  return u;
}

template <typename T>
Var<T> Upscaler<T>::operator()(const Var<T>& grid, std::size_t height,
                               std::size_t width) const {
  Var<T> x = grid;
  for (const auto& stage : stages) {
    x = stage(x, height, width);
    height *= 2;
    width *= 2;
  }
  return x;
}

template <typename T>
void Upscaler<T>::collect(const std::string& prefix, ParameterList<T>& out,
                          int lr_depth) const {
  for (std::size_t i = 0; i < stages.size(); ++i) {
    stages[i].collect(prefix + "." + std::to_string(i), out, lr_depth);
  }
}

#define LIQUIDSEG_INSTANTIATE_LAYERS(T)                                  \
  template struct Linear<T>;                                             \
  template struct LayerNorm<T>;                                          \
  template struct MultiHeadAttention<T>;                                 \
  template struct EncoderBlock<T>;                                       \
  template struct Mlp3<T>;                                               \
  template struct PatchEmbed<T>;                                         \
  template struct UpscaleStage<T>;                                       \
  template struct Upscaler<T>;                                           \
  template Tensor<T> extract_patches<T>(const Image&, std::size_t);

LIQUIDSEG_INSTANTIATE_LAYERS(float)
LIQUIDSEG_INSTANTIATE_LAYERS(double)

#undef LIQUIDSEG_INSTANTIATE_LAYERS

}  // namespace liquidseg::nn
