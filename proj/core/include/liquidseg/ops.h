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

#ifndef LIQUIDSEG_OPS_H_
#define LIQUIDSEG_OPS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "liquidseg/autograd.h"
#include "liquidseg/rng.h"

// Differentiable numeric primitives. Every op treats the trailing dimension
// as features and all leading dimensions as rows. Instantiated for float
// (training) and double (gradient checks).
namespace liquidseg::ops {

// a[.., K] x b[N, K]^T -> [.., N].
template <typename T>
Var<T> matmul_nt(const Var<T>& a, const Var<T>& b);

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);

// x[.., C] + bias[C] broadcast over rows.
template <typename T>
Var<T> add_bias(const Var<T>& x, const Var<T>& bias);

// y = x W^T + b over the trailing dimension; `bias` may be undefined.
template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias);

template <typename T>
Var<T> scale(const Var<T>& x, T factor);

// Exact (erf) GELU.
template <typename T>
Var<T> gelu(const Var<T>& x);

template <typename T>
Var<T> relu(const Var<T>& x);

template <typename T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gain, const Var<T>& shift,
                  T eps);

template <typename T>
Var<T> concat_rows(const Var<T>& a, const Var<T>& b);

// Rows [begin, end) of a rank-2 tensor.
template <typename T>
Var<T> slice_rows(const Var<T>& x, std::size_t begin, std::size_t end);

// [h*w, 4c] -> [(2h)*(2w), c]. Column block (i*2 + j) of input pixel (y, x)
// lands at output pixel (2y + i, 2x + j).
template <typename T>
Var<T> pixel_shuffle2(const Var<T>& x, std::size_t height, std::size_t width);

// Bilinear resize (half-pixel centers, edge clamp) of each row of
// x [r, h*w] seen as an h x w plane; result [r, out_h*out_w].
template <typename T>
Var<T> resize_bilinear_rows(const Var<T>& x, std::size_t height,
                            std::size_t width, std::size_t out_height,
                            std::size_t out_width);

template <typename T>
Var<T> sum(const Var<T>& x);

struct AttentionOptions {
  std::size_t num_heads = 1;
  double dropout = 0.0;
  bool training = false;
  Rng* rng = nullptr;  // required when training with dropout > 0
};

// Multi-head scaled dot-product attention over already projected inputs:
// q[Nq, D], k[Nk, D], v[Nk, D] -> [Nq, D]. Heads split D into contiguous
// column blocks. If `weights_out` is given it receives the post-softmax,
// pre-dropout weights laid out [head][query][key].
template <typename T>
Var<T> scaled_dot_attention(const Var<T>& q, const Var<T>& k, const Var<T>& v,
                            const AttentionOptions& options,
                            std::vector<T>* weights_out = nullptr);

// Mean over rows of -log softmax(logits[r])[targets[r]].
template <typename T>
Var<T> softmax_cross_entropy(const Var<T>& logits,
                             std::span<const std::size_t> targets);

// Mean binary cross-entropy of sigmoid(logits) against binary targets over
// the pixels where `valid` is nonzero (all pixels when `valid` is empty).
// Returns zero when nothing is valid.
template <typename T>
Var<T> sigmoid_bce(const Var<T>& logits, std::span<const std::uint8_t> targets,
                   std::span<const std::uint8_t> valid);

// 1 - (2 sum(p g) + eps) / (sum(p) + sum(g) + eps), p = sigmoid(logits),
// restricted to valid pixels.
template <typename T>
Var<T> dice_loss(const Var<T>& logits, std::span<const std::uint8_t> targets,
                 std::span<const std::uint8_t> valid, T eps);

// logits[K, n]: per pixel p = max_k sigmoid(logits[k, pixel]), then mean BCE
// against targets[n] over valid pixels. Ties go to the lowest k.
template <typename T>
Var<T> max_sigmoid_bce(const Var<T>& logits,
                       std::span<const std::uint8_t> targets,
                       std::span<const std::uint8_t> valid);

}  // namespace liquidseg::ops

#endif  // LIQUIDSEG_OPS_H_
