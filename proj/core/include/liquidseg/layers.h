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

#ifndef LIQUIDSEG_LAYERS_H_
#define LIQUIDSEG_LAYERS_H_

#include <cstddef>
#include <string>
#include <vector>

#include "liquidseg/autograd.h"
#include "liquidseg/image.h"
#include "liquidseg/ops.h"
#include "liquidseg/rng.h"

namespace liquidseg::nn {

// A trainable tensor with its canonical checkpoint name. `lr_depth` is the
// distance from the top of the backbone (layer-wise lr decay exponent), or
// -1 for parameters trained at the base rate.
template <typename T>
struct NamedParameter {
  std::string name;
  Var<T> var;
  int lr_depth = -1;
  bool weight_decay = true;
};

template <typename T>
using ParameterList = std::vector<NamedParameter<T>>;

struct ForwardContext {
  bool training = false;
  Rng* rng = nullptr;
};

template <typename T>
struct Linear {
  Var<T> weight;  // [out, in]
  Var<T> bias;    // [out]

  static Linear init(std::size_t in, std::size_t out, Rng& rng);
  std::size_t in_features() const { return weight.shape()[1]; }
  std::size_t out_features() const { return weight.shape()[0]; }
  Var<T> operator()(const Var<T>& x) const;
  void collect(const std::string& prefix, ParameterList<T>& out,
               int lr_depth) const;
};

template <typename T>
struct LayerNorm {
  Var<T> gain;
  Var<T> shift;
  T eps = T(1e-6);

  static LayerNorm init(std::size_t width);
  Var<T> operator()(const Var<T>& x) const;
  void collect(const std::string& prefix, ParameterList<T>& out,
               int lr_depth) const;
};

template <typename T>
struct MultiHeadAttention {
  std::size_t num_heads = 1;
  double dropout = 0.0;
  Linear<T> q, k, v, out;

  static MultiHeadAttention init(std::size_t width, std::size_t num_heads,
                                 double dropout, Rng& rng);
  // Rows of `q_in` attend over rows of `kv_in`.
  Var<T> operator()(const Var<T>& q_in, const Var<T>& kv_in,
                    const ForwardContext& ctx,
                    std::vector<T>* weights_out = nullptr) const;
  void collect(const std::string& prefix, ParameterList<T>& out,
               int lr_depth) const;
};

// Pre-norm transformer encoder block:
//   x = x + attn(ln1(x)); x = x + fc2(gelu(fc1(ln2(x)))).
template <typename T>
struct EncoderBlock {
  LayerNorm<T> norm1, norm2;
  MultiHeadAttention<T> attn;
  Linear<T> fc1, fc2;

  static EncoderBlock init(std::size_t width, std::size_t num_heads,
                           std::size_t mlp_ratio, double dropout, Rng& rng);
  Var<T> operator()(const Var<T>& tokens, const ForwardContext& ctx) const;
  void collect(const std::string& prefix, ParameterList<T>& out,
               int lr_depth) const;
};

// linear -> relu -> linear -> relu -> linear
template <typename T>
struct Mlp3 {
  Linear<T> l1, l2, l3;

  static Mlp3 init(std::size_t width, Rng& rng);
  Var<T> operator()(const Var<T>& x) const;
  void collect(const std::string& prefix, ParameterList<T>& out,
               int lr_depth) const;
};

// Non-overlapping P x P x 3 patches, flattened (row, col, channel), in
// row-major patch-grid order.
template <typename T>
Tensor<T> extract_patches(const Image& image, std::size_t patch_size);

template <typename T>
struct PatchEmbed {
  std::size_t patch_size = 16;
  Linear<T> proj;   // [D, P*P*3]
  Var<T> pos_embed; // [num_patches, D]

  static PatchEmbed init(std::size_t patch_size, std::size_t num_patches,
                         std::size_t width, Rng& rng);
  Var<T> operator()(const Image& image) const;
  void collect(const std::string& prefix, ParameterList<T>& out,
               int lr_depth) const;
};

// One stride-2 learned upsampling step: a 2x2 / stride-2 transposed
// convolution (weight [4D, D] followed by a pixel shuffle, shared bias),
// then GELU and a per-pixel layer norm.
template <typename T>
struct UpscaleStage {
  Var<T> weight;  // [4 * D, D]
  Var<T> bias;    // [D]
  LayerNorm<T> norm;

  static UpscaleStage init(std::size_t width, Rng& rng);
  Var<T> operator()(const Var<T>& grid, std::size_t height,
                    std::size_t width) const;
  void collect(const std::string& prefix, ParameterList<T>& out,
               int lr_depth) const;
};

template <typename T>
struct Upscaler {
  std::vector<UpscaleStage<T>> stages;

  static Upscaler init(std::size_t num_stages, std::size_t width, Rng& rng);
  // grid [h*w, D] -> [(h*2^n)*(w*2^n), D]
  Var<T> operator()(const Var<T>& grid, std::size_t height,
                    std::size_t width) const;
  void collect(const std::string& prefix, ParameterList<T>& out,
               int lr_depth) const;
};

}  // namespace liquidseg::nn

#endif  // LIQUIDSEG_LAYERS_H_
