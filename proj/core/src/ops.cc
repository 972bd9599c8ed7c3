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

#include "liquidseg/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace liquidseg::ops {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

template <typename T>
bool wants_grad(const std::shared_ptr<Node<T>>& n) {
  return n->requires_grad;
}

template <typename T>
T stable_softplus(T x) {
  // log(1 + exp(x))
  return std::max(x, T{0}) + std::log1p(std::exp(-std::abs(x)));
}

template <typename T>
T sigmoid(T x) {
  if (x >= 0) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

bool is_valid(std::span<const std::uint8_t> valid, std::size_t i) {
  return valid.empty() || valid[i] != 0;
}

}  // namespace

template <typename T>
Var<T> matmul_nt(const Var<T>& a, const Var<T>& b) {
  require(b.shape().size() == 2, "matmul_nt: weight must be rank 2, got " +
                                     shape_string(b.shape()));
  const std::size_t K = a.cols();
  const std::size_t M = a.rows();
  const std::size_t N = b.shape()[0];
  require(b.shape()[1] == K, "matmul_nt: trailing dimension " +
                                 std::to_string(K) + " of " +
                                 shape_string(a.shape()) +
                                 " does not match weight " +
                                 shape_string(b.shape()));
  Shape out_shape = a.shape();
  out_shape.back() = N;
  Tensor<T> out(out_shape);
  const T* A = a.value().data.data();
  const T* B = b.value().data.data();
  for (std::size_t m = 0; m < M; ++m) {
    const T* ar = A + m * K;
    T* orow = out.data.data() + m * N;
    for (std::size_t n = 0; n < N; ++n) {
      const T* br = B + n * K;
      T acc{0};
      for (std::size_t k = 0; k < K; ++k) acc += ar[k] * br[k];
      orow[n] = acc;
    }
  }
  return make_result<T>(std::move(out), {a, b}, [M, N, K](Node<T>& o) {
    auto& na = o.inputs[0];
    auto& nb = o.inputs[1];
    const T* G = o.grad.data();
    const T* A = na->value.data.data();
    const T* B = nb->value.data.data();
    if (wants_grad(na)) {
      T* dA = na->ensure_grad().data();
      for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t n = 0; n < N; ++n) {
          const T g = G[m * N + n];
          if (g == T{0}) continue;
          const T* br = B + n * K;
          T* dar = dA + m * K;
          for (std::size_t k = 0; k < K; ++k) dar[k] += g * br[k];
        }
      }
    }
    if (wants_grad(nb)) {
      T* dB = nb->ensure_grad().data();
      for (std::size_t m = 0; m < M; ++m) {
        const T* ar = A + m * K;
        for (std::size_t n = 0; n < N; ++n) {
          const T g = G[m * N + n];
          if (g == T{0}) continue;
          T* dbr = dB + n * K;
          for (std::size_t k = 0; k < K; ++k) dbr[k] += g * ar[k];
        }
      }
    }
  });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require(a.shape() == b.shape(), "add: shape mismatch " +
                                      shape_string(a.shape()) + " vs " +
                                      shape_string(b.shape()));
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data[i] = a.data()[i] + b.data()[i];
  }
  return make_result<T>(std::move(out), {a, b}, [](Node<T>& o) {
    for (auto& in : o.inputs) {
      if (!wants_grad(in)) continue;
      auto& g = in->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
    }
  });
}

template <typename T>
Var<T> add_bias(const Var<T>& x, const Var<T>& bias) {
  const std::size_t C = x.cols();
  require(bias.size() == C, "add_bias: bias of shape " +
                                shape_string(bias.shape()) +
                                " does not match features of " +
                                shape_string(x.shape()));
  const std::size_t R = x.rows();
  Tensor<T> out = x.value();
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t c = 0; c < C; ++c) out.data[r * C + c] += bias.data()[c];
  }
  return make_result<T>(std::move(out), {x, bias}, [R, C](Node<T>& o) {
    auto& nx = o.inputs[0];
    auto& nb = o.inputs[1];
    if (wants_grad(nx)) {
      auto& g = nx->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
    }
    if (wants_grad(nb)) {
      auto& g = nb->ensure_grad();
      for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t c = 0; c < C; ++c) g[c] += o.grad[r * C + c];
      }
    }
  });
}

template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias) {
  Var<T> y = matmul_nt(x, weight);
  return bias.defined() ? add_bias(y, bias) : y;
}

template <typename T>
Var<T> scale(const Var<T>& x, T factor) {
  Tensor<T> out = x.value();
  for (auto& v : out.data) v *= factor;
  return make_result<T>(std::move(out), {x}, [factor](Node<T>& o) {
    auto& g = o.inputs[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * o.grad[i];
  });
}

template <typename T>
Var<T> gelu(const Var<T>& x) {
  constexpr T kInvSqrt2 = T(0.70710678118654752440);
  constexpr T kInvSqrt2Pi = T(0.39894228040143267794);
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const T v = x.data()[i];
    out.data[i] = T(0.5) * v * (T{1} + std::erf(v * kInvSqrt2));
  }
  return make_result<T>(std::move(out), {x}, [](Node<T>& o) {
    auto& in = o.inputs[0];
    auto& g = in->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const T v = in->value.data[i];
      const T cdf = T(0.5) * (T{1} + std::erf(v * kInvSqrt2));
      const T pdf = kInvSqrt2Pi * std::exp(T(-0.5) * v * v);
      g[i] += o.grad[i] * (cdf + v * pdf);
    }
  });
}

template <typename T>
Var<T> relu(const Var<T>& x) {
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data[i] = std::max(x.data()[i], T{0});
  }
  return make_result<T>(std::move(out), {x}, [](Node<T>& o) {
    auto& in = o.inputs[0];
    auto& g = in->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (in->value.data[i] > T{0}) g[i] += o.grad[i];
    }
  });
}

template <typename T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gain, const Var<T>& shift,
                  T eps) {
  const std::size_t D = x.cols();
  require(gain.size() == D && shift.size() == D,
          "layer_norm: gain/shift must have " + std::to_string(D) +
              " values for input " + shape_string(x.shape()));
  require(eps > T{0}, "layer_norm: eps must be positive");
  const std::size_t R = x.rows();
  Tensor<T> out(x.shape());
  // Saved per row: 1/sqrt(var + eps); normalized values recomputed in
  // backward from the saved mean.
  std::vector<T> mean(R), inv_std(R);
  for (std::size_t r = 0; r < R; ++r) {
    const T* xr = x.data().data() + r * D;
    T mu{0};
    for (std::size_t d = 0; d < D; ++d) mu += xr[d];
    mu /= T(D);
    T var{0};
    for (std::size_t d = 0; d < D; ++d) var += (xr[d] - mu) * (xr[d] - mu);
    var /= T(D);
    const T inv = T{1} / std::sqrt(var + eps);
    mean[r] = mu;
    inv_std[r] = inv;
    for (std::size_t d = 0; d < D; ++d) {
      out.data[r * D + d] =
          gain.data()[d] * (xr[d] - mu) * inv + shift.data()[d];
    }
  }
  return make_result<T>(
      std::move(out), {x, gain, shift},
      [R, D, mean = std::move(mean), inv_std = std::move(inv_std)](Node<T>& o) {
        auto& nx = o.inputs[0];
        auto& ng = o.inputs[1];
        auto& ns = o.inputs[2];
        const T* X = nx->value.data.data();
        const T* Gn = ng->value.data.data();
        std::vector<T> xhat(D), dxhat(D);
        for (std::size_t r = 0; r < R; ++r) {
          const T* dy = o.grad.data() + r * D;
          T sum_dxhat{0}, sum_dxhat_xhat{0};
          for (std::size_t d = 0; d < D; ++d) {
            xhat[d] = (X[r * D + d] - mean[r]) * inv_std[r];
            dxhat[d] = dy[d] * Gn[d];
            sum_dxhat += dxhat[d];
            sum_dxhat_xhat += dxhat[d] * xhat[d];
          }
          if (wants_grad(nx)) {
            T* dx = nx->ensure_grad().data() + r * D;
            const T k = inv_std[r] / T(D);
            for (std::size_t d = 0; d < D; ++d) {
              dx[d] += k * (T(D) * dxhat[d] - sum_dxhat -
                            xhat[d] * sum_dxhat_xhat);
            }
          }
          if (wants_grad(ng)) {
            auto& dg = ng->ensure_grad();
            for (std::size_t d = 0; d < D; ++d) dg[d] += dy[d] * xhat[d];
          }
          if (wants_grad(ns)) {
            auto& ds = ns->ensure_grad();
            for (std::size_t d = 0; d < D; ++d) ds[d] += dy[d];
          }
        }
      });
}

template <typename T>
Var<T> concat_rows(const Var<T>& a, const Var<T>& b) {
  require(a.shape().size() == 2 && b.shape().size() == 2 &&
              a.cols() == b.cols(),
          "concat_rows: incompatible shapes " + shape_string(a.shape()) +
              " and " + shape_string(b.shape()));
  Tensor<T> out(Shape{a.rows() + b.rows(), a.cols()});
  std::copy(a.data().begin(), a.data().end(), out.data.begin());
  std::copy(b.data().begin(), b.data().end(),
            out.data.begin() + static_cast<std::ptrdiff_t>(a.size()));
  const std::size_t split = a.size();
  return make_result<T>(std::move(out), {a, b}, [split](Node<T>& o) {
    auto& na = o.inputs[0];
    auto& nb = o.inputs[1];
    if (wants_grad(na)) {
      auto& g = na->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
    }
    if (wants_grad(nb)) {
      auto& g = nb->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[split + i];
    }
  });
}

template <typename T>
Var<T> slice_rows(const Var<T>& x, std::size_t begin, std::size_t end) {
  require(x.shape().size() == 2 && begin < end && end <= x.rows(),
          "slice_rows: range [" + std::to_string(begin) + "," +
              std::to_string(end) + ") invalid for " +
              shape_string(x.shape()));
  const std::size_t C = x.cols();
  Tensor<T> out(Shape{end - begin, C});
  std::copy(x.data().begin() + static_cast<std::ptrdiff_t>(begin * C),
            x.data().begin() + static_cast<std::ptrdiff_t>(end * C),
            out.data.begin());
  const std::size_t offset = begin * C;
  return make_result<T>(std::move(out), {x}, [offset](Node<T>& o) {
    auto& g = o.inputs[0]->ensure_grad();
    for (std::size_t i = 0; i < o.grad.size(); ++i) g[offset + i] += o.grad[i];
  });
}

template <typename T>
Var<T> pixel_shuffle2(const Var<T>& x, std::size_t height, std::size_t width) {
  require(x.shape().size() == 2 && x.rows() == height * width &&
              x.cols() % 4 == 0,
          "pixel_shuffle2: expected [" + std::to_string(height * width) +
              ", 4c], got " + shape_string(x.shape()));
  const std::size_t C = x.cols() / 4;
  const std::size_t out_w = 2 * width;
  Tensor<T> out(Shape{4 * height * width, C});
  // index map: output element -> input element
  std::vector<std::size_t> src(out.size());
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t xx = 0; xx < width; ++xx) {
      for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
          const std::size_t orow = (2 * y + i) * out_w + (2 * xx + j);
          const std::size_t irow = y * width + xx;
          for (std::size_t c = 0; c < C; ++c) {
            src[orow * C + c] = irow * 4 * C + (i * 2 + j) * C + c;
          }
        }
      }
    }
  }
  for (std::size_t e = 0; e < out.size(); ++e) out.data[e] = x.data()[src[e]];
  return make_result<T>(std::move(out), {x}, [src = std::move(src)](Node<T>& o) {
    auto& g = o.inputs[0]->ensure_grad();
    for (std::size_t e = 0; e < src.size(); ++e) g[src[e]] += o.grad[e];
  });
}

namespace {

struct LinearTap {
  std::size_t lo, hi;
  double w_hi;
};

std::vector<LinearTap> linear_taps(std::size_t src, std::size_t dst) {
  std::vector<LinearTap> taps(dst);
  const double ratio = static_cast<double>(src) / static_cast<double>(dst);
  for (std::size_t i = 0; i < dst; ++i) {
    const double s = std::clamp((static_cast<double>(i) + 0.5) * ratio - 0.5, 0.0,
                                static_cast<double>(src - 1));
    const auto lo = static_cast<std::size_t>(std::floor(s));
    taps[i] = {lo, std::min(lo + 1, src - 1), s - static_cast<double>(lo)};
  }
  return taps;
}

}  // namespace

template <typename T>
Var<T> resize_bilinear_rows(const Var<T>& x, std::size_t height,
                            std::size_t width, std::size_t out_height,
                            std::size_t out_width) {
  require(x.shape().size() == 2 && x.cols() == height * width,
          "resize_bilinear_rows: expected [r, " + std::to_string(height * width) +
              "], got " + shape_string(x.shape()));
  if (height == out_height && width == out_width) return x;
  const std::size_t R = x.rows();
  const std::size_t n_in = height * width;
  const std::size_t n_out = out_height * out_width;
  auto ty = linear_taps(height, out_height);
  auto tx = linear_taps(width, out_width);
  Tensor<T> out(Shape{R, n_out});
  const auto& in = x.data();
  for (std::size_t r = 0; r < R; ++r) {
    const T* src = in.data() + r * n_in;
    T* dst = out.data.data() + r * n_out;
    for (std::size_t y = 0; y < out_height; ++y) {
      const auto& a = ty[y];
      for (std::size_t xx = 0; xx < out_width; ++xx) {
        const auto& b = tx[xx];
        const double top = src[a.lo * width + b.lo] * (1 - b.w_hi) +
                           src[a.lo * width + b.hi] * b.w_hi;
        const double bot = src[a.hi * width + b.lo] * (1 - b.w_hi) +
                           src[a.hi * width + b.hi] * b.w_hi;
        dst[y * out_width + xx] = static_cast<T>(top * (1 - a.w_hi) + bot * a.w_hi);
      }
    }
  }
  return make_result<T>(
      std::move(out), {x},
      [=, ty = std::move(ty), tx = std::move(tx)](Node<T>& o) {
        auto& g = o.inputs[0]->ensure_grad();
        for (std::size_t r = 0; r < R; ++r) {
          T* gi = g.data() + r * n_in;
          const T* go = o.grad.data() + r * n_out;
          for (std::size_t y = 0; y < out_height; ++y) {
            const auto& a = ty[y];
            for (std::size_t xx = 0; xx < out_width; ++xx) {
              const auto& b = tx[xx];
              const double v = go[y * out_width + xx];
              gi[a.lo * width + b.lo] += static_cast<T>(v * (1 - a.w_hi) * (1 - b.w_hi));
              gi[a.lo * width + b.hi] += static_cast<T>(v * (1 - a.w_hi) * b.w_hi);
              gi[a.hi * width + b.lo] += static_cast<T>(v * a.w_hi * (1 - b.w_hi));
              gi[a.hi * width + b.hi] += static_cast<T>(v * a.w_hi * b.w_hi);
            }
          }
        }
      });
}

template <typename T>
Var<T> sum(const Var<T>& x) {
  T acc{0};
  for (T v : x.data()) acc += v;
  return make_result<T>(Tensor<T>(Shape{1}, {acc}), {x}, [](Node<T>& o) {
    auto& g = o.inputs[0]->ensure_grad();
    for (auto& v : g) v += o.grad[0];
  });
}

template <typename T>
Var<T> scaled_dot_attention(const Var<T>& q, const Var<T>& k, const Var<T>& v,
                            const AttentionOptions& options,
                            std::vector<T>* weights_out) {
  require(q.shape().size() == 2 && k.shape().size() == 2 &&
              v.shape() == k.shape() && q.cols() == k.cols(),
          "attention: incompatible q " + shape_string(q.shape()) + ", k " +
              shape_string(k.shape()) + ", v " + shape_string(v.shape()));
  const std::size_t Nq = q.rows();
  const std::size_t Nk = k.rows();
  const std::size_t D = q.cols();
  const std::size_t H = options.num_heads;
  require(Nk >= 1, "attention: need at least one key");
  require(H >= 1 && D % H == 0, "attention: width " + std::to_string(D) +
                                    " not divisible into " +
                                    std::to_string(H) + " heads");
  const std::size_t dh = D / H;
  const T scale_factor = T{1} / std::sqrt(T(dh));
  const bool drop = options.training && options.dropout > 0.0;
  if (drop) {
    require(options.rng != nullptr, "attention: dropout needs an rng");
    require(options.dropout < 1.0, "attention: dropout must be < 1");
  }
  const T keep_scale = drop ? T(1.0 / (1.0 - options.dropout)) : T{1};

  const T* Q = q.data().data();
  const T* K = k.data().data();
  const T* V = v.data().data();
  // probs: post-softmax; used: probs after dropout (what multiplies v)
  std::vector<T> probs(H * Nq * Nk);
  std::vector<T> used;
  if (drop) used.resize(probs.size());
  Tensor<T> out(Shape{Nq, D});
  std::vector<T> row(Nk);
  for (std::size_t h = 0; h < H; ++h) {
    const std::size_t c0 = h * dh;
    for (std::size_t i = 0; i < Nq; ++i) {
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t j = 0; j < Nk; ++j) {
        T s{0};
        for (std::size_t c = 0; c < dh; ++c) {
          s += Q[i * D + c0 + c] * K[j * D + c0 + c];
        }
        row[j] = s * scale_factor;
        mx = std::max(mx, row[j]);
      }
      T z{0};
      for (std::size_t j = 0; j < Nk; ++j) {
        row[j] = std::exp(row[j] - mx);
        z += row[j];
      }
      T* p = probs.data() + (h * Nq + i) * Nk;
      for (std::size_t j = 0; j < Nk; ++j) p[j] = row[j] / z;
      const T* pu = p;
      if (drop) {
        T* u = used.data() + (h * Nq + i) * Nk;
        for (std::size_t j = 0; j < Nk; ++j) {
          u[j] = options.rng->bernoulli(options.dropout) ? T{0}
                                                         : p[j] * keep_scale;
        }
        pu = u;
      }
      T* orow = out.data.data() + i * D + c0;
      for (std::size_t j = 0; j < Nk; ++j) {
        const T w = pu[j];
        for (std::size_t c = 0; c < dh; ++c) orow[c] += w * V[j * D + c0 + c];
      }
    }
  }
  if (weights_out) *weights_out = probs;

  return make_result<T>(
      std::move(out), {q, k, v},
      [=, probs = std::move(probs), used = std::move(used)](Node<T>& o) {
        auto& nq = o.inputs[0];
        auto& nk = o.inputs[1];
        auto& nv = o.inputs[2];
        const T* Q = nq->value.data.data();
        const T* K = nk->value.data.data();
        const T* V = nv->value.data.data();
        const T* G = o.grad.data();
        T* dQ = wants_grad(nq) ? nq->ensure_grad().data() : nullptr;
        T* dK = wants_grad(nk) ? nk->ensure_grad().data() : nullptr;
        T* dV = wants_grad(nv) ? nv->ensure_grad().data() : nullptr;
        std::vector<T> dp(Nk);
        for (std::size_t h = 0; h < H; ++h) {
          const std::size_t c0 = h * dh;
          for (std::size_t i = 0; i < Nq; ++i) {
            const T* p = probs.data() + (h * Nq + i) * Nk;
            const T* pu = drop ? used.data() + (h * Nq + i) * Nk : p;
            const T* gi = G + i * D + c0;
            for (std::size_t j = 0; j < Nk; ++j) {
              T s{0};
              for (std::size_t c = 0; c < dh; ++c) s += gi[c] * V[j * D + c0 + c];
              // through dropout: d(used)/d(p) is keep_scale or 0
              if (drop) s = (pu[j] == T{0}) ? T{0} : s * keep_scale;
              dp[j] = s;
              if (dV) {
                for (std::size_t c = 0; c < dh; ++c) {
                  dV[j * D + c0 + c] += pu[j] * gi[c];
                }
              }
            }
            T dot{0};
            for (std::size_t j = 0; j < Nk; ++j) dot += dp[j] * p[j];
            for (std::size_t j = 0; j < Nk; ++j) {
              const T ds = p[j] * (dp[j] - dot) * scale_factor;
              if (ds == T{0}) continue;
              if (dQ) {
                for (std::size_t c = 0; c < dh; ++c) {
                  dQ[i * D + c0 + c] += ds * K[j * D + c0 + c];
                }
              }
              if (dK) {
                for (std::size_t c = 0; c < dh; ++c) {
                  dK[j * D + c0 + c] += ds * Q[i * D + c0 + c];
                }
              }
            }
          }
        }
      });
}

template <typename T>
Var<T> softmax_cross_entropy(const Var<T>& logits,
                             std::span<const std::size_t> targets) {
  const std::size_t R = logits.rows();
  const std::size_t C = logits.cols();
  require(targets.size() == R, "softmax_cross_entropy: " +
                                   std::to_string(targets.size()) +
                                   " targets for " + std::to_string(R) +
                                   " rows");
  std::vector<T> probs(R * C);
  T loss{0};
  for (std::size_t r = 0; r < R; ++r) {
    require(targets[r] < C, "softmax_cross_entropy: target out of range");
    const T* l = logits.data().data() + r * C;
    const T mx = *std::max_element(l, l + C);
    T z{0};
    for (std::size_t c = 0; c < C; ++c) z += std::exp(l[c] - mx);
    const T log_z = std::log(z) + mx;
    for (std::size_t c = 0; c < C; ++c) probs[r * C + c] = std::exp(l[c] - log_z);
    loss += log_z - l[targets[r]];
  }
  loss /= T(R);
  std::vector<std::size_t> tgt(targets.begin(), targets.end());
  return make_result<T>(
      Tensor<T>(Shape{1}, {loss}), {logits},
      [R, C, probs = std::move(probs), tgt = std::move(tgt)](Node<T>& o) {
        auto& g = o.inputs[0]->ensure_grad();
        const T s = o.grad[0] / T(R);
        for (std::size_t r = 0; r < R; ++r) {
          for (std::size_t c = 0; c < C; ++c) {
            const T y = (c == tgt[r]) ? T{1} : T{0};
            g[r * C + c] += s * (probs[r * C + c] - y);
          }
        }
      });
}

template <typename T>
Var<T> sigmoid_bce(const Var<T>& logits, std::span<const std::uint8_t> targets,
                   std::span<const std::uint8_t> valid) {
  const std::size_t n = logits.size();
  require(targets.size() == n && (valid.empty() || valid.size() == n),
          "sigmoid_bce: target/valid sizes do not match logits " +
              shape_string(logits.shape()));
  std::size_t count = 0;
  T loss{0};
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_valid(valid, i)) continue;
    const T x = logits.data()[i];
    loss += stable_softplus(x) - x * T(targets[i] ? 1 : 0);
    ++count;
  }
  const T denom = count ? T(count) : T{1};
  loss /= denom;
  std::vector<std::uint8_t> tg(targets.begin(), targets.end());
  std::vector<std::uint8_t> vd(valid.begin(), valid.end());
  return make_result<T>(
      Tensor<T>(Shape{1}, {loss}), {logits},
      [denom, tg = std::move(tg), vd = std::move(vd)](Node<T>& o) {
        auto& in = o.inputs[0];
        auto& g = in->ensure_grad();
        const T s = o.grad[0] / denom;
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (!is_valid(vd, i)) continue;
          g[i] += s * (sigmoid(in->value.data[i]) - T(tg[i] ? 1 : 0));
        }
      });
}

template <typename T>
Var<T> dice_loss(const Var<T>& logits, std::span<const std::uint8_t> targets,
                 std::span<const std::uint8_t> valid, T eps) {
  const std::size_t n = logits.size();
  require(targets.size() == n && (valid.empty() || valid.size() == n),
          "dice_loss: target/valid sizes do not match logits " +
              shape_string(logits.shape()));
  T inter{0}, psum{0}, gsum{0};
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_valid(valid, i)) continue;
    const T p = sigmoid(logits.data()[i]);
    const T g = T(targets[i] ? 1 : 0);
    inter += p * g;
    psum += p;
    gsum += g;
  }
  const T num = T{2} * inter + eps;
  const T den = psum + gsum + eps;
  const T loss = T{1} - num / den;
  std::vector<std::uint8_t> tg(targets.begin(), targets.end());
  std::vector<std::uint8_t> vd(valid.begin(), valid.end());
  return make_result<T>(
      Tensor<T>(Shape{1}, {loss}), {logits},
      [num, den, tg = std::move(tg), vd = std::move(vd)](Node<T>& o) {
        auto& in = o.inputs[0];
        auto& g = in->ensure_grad();
        // d loss / d p_i = -(2 g_i den - num) / den^2
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (!is_valid(vd, i)) continue;
          const T p = sigmoid(in->value.data[i]);
          const T gi = T(tg[i] ? 1 : 0);
          const T dl_dp = -(T{2} * gi * den - num) / (den * den);
          g[i] += o.grad[0] * dl_dp * p * (T{1} - p);
        }
      });
}

template <typename T>
Var<T> max_sigmoid_bce(const Var<T>& logits,
                       std::span<const std::uint8_t> targets,
                       std::span<const std::uint8_t> valid) {
  require(logits.shape().size() == 2,
          "max_sigmoid_bce: logits must be [K, n], got " +
              shape_string(logits.shape()));
  const std::size_t K = logits.rows();
  const std::size_t n = logits.cols();
  require(targets.size() == n && (valid.empty() || valid.size() == n),
          "max_sigmoid_bce: target/valid sizes do not match " +
              shape_string(logits.shape()));
  // sigmoid is monotone, so max_k sigmoid(l_k) = sigmoid(max_k l_k)
  std::vector<std::size_t> winner(n, 0);
  std::size_t count = 0;
  T loss{0};
  const T* L = logits.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < K; ++k) {
      if (L[k * n + i] > L[best * n + i]) best = k;
    }
    winner[i] = best;
    if (!is_valid(valid, i)) continue;
    const T x = L[best * n + i];
    loss += stable_softplus(x) - x * T(targets[i] ? 1 : 0);
    ++count;
  }
  const T denom = count ? T(count) : T{1};
  loss /= denom;
  std::vector<std::uint8_t> tg(targets.begin(), targets.end());
  std::vector<std::uint8_t> vd(valid.begin(), valid.end());
  return make_result<T>(
      Tensor<T>(Shape{1}, {loss}), {logits},
      [n, denom, winner = std::move(winner), tg = std::move(tg),
       vd = std::move(vd)](Node<T>& o) {
        auto& in = o.inputs[0];
        auto& g = in->ensure_grad();
        const T s = o.grad[0] / denom;
        for (std::size_t i = 0; i < n; ++i) {
          if (!is_valid(vd, i)) continue;
          const std::size_t e = winner[i] * n + i;
          g[e] += s * (sigmoid(in->value.data[e]) - T(tg[i] ? 1 : 0));
        }
      });
}

#define LIQUIDSEG_INSTANTIATE_OPS(T)                                          \
  template Var<T> matmul_nt(const Var<T>&, const Var<T>&);                    \
  template Var<T> add(const Var<T>&, const Var<T>&);                          \
  template Var<T> add_bias(const Var<T>&, const Var<T>&);                     \
  template Var<T> linear(const Var<T>&, const Var<T>&, const Var<T>&);        \
  template Var<T> scale(const Var<T>&, T);                                    \
  template Var<T> gelu(const Var<T>&);                                        \
  template Var<T> relu(const Var<T>&);                                        \
  template Var<T> layer_norm(const Var<T>&, const Var<T>&, const Var<T>&, T); \
  template Var<T> concat_rows(const Var<T>&, const Var<T>&);                  \
  template Var<T> slice_rows(const Var<T>&, std::size_t, std::size_t);        \
  template Var<T> pixel_shuffle2(const Var<T>&, std::size_t, std::size_t);    \
  template Var<T> resize_bilinear_rows(const Var<T>&, std::size_t,             \
                                       std::size_t, std::size_t, std::size_t); \
  template Var<T> sum(const Var<T>&);                                         \
  template Var<T> scaled_dot_attention(const Var<T>&, const Var<T>&,          \
                                       const Var<T>&, const AttentionOptions&, \
                                       std::vector<T>*);                      \
  template Var<T> softmax_cross_entropy(const Var<T>&,                        \
                                        std::span<const std::size_t>);        \
  template Var<T> sigmoid_bce(const Var<T>&, std::span<const std::uint8_t>,   \
                              std::span<const std::uint8_t>);                 \
  template Var<T> dice_loss(const Var<T>&, std::span<const std::uint8_t>,     \
                            std::span<const std::uint8_t>, T);                \
  template Var<T> max_sigmoid_bce(const Var<T>&,                              \
                                  std::span<const std::uint8_t>,              \
                                  std::span<const std::uint8_t>);

LIQUIDSEG_INSTANTIATE_OPS(float)
LIQUIDSEG_INSTANTIATE_OPS(double)

#undef LIQUIDSEG_INSTANTIATE_OPS

}  // namespace liquidseg::ops
