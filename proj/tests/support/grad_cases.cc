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

#include "grad_cases.h"

#include <algorithm>
#include <cmath>

#include "liquidseg/layers.h"
#include "liquidseg/loss.h"
#include "liquidseg/model.h"
#include "liquidseg/ops.h"
#include "liquidseg/synth.h"

namespace liquidseg::testing {
namespace {

using V = Var<double>;
constexpr double kOpTolerance = 1e-4;
constexpr double kModelTolerance = 1e-3;

std::vector<std::uint8_t> random_bits(std::size_t n, Rng& rng, double p) {
  std::vector<std::uint8_t> b(n);
  for (auto& x : b) x = rng.bernoulli(p) ? 1 : 0;
  return b;
}

// Values kept at least `gap` away from zero so that kinks are not straddled.
V random_away_from_zero(Shape shape, Rng& rng, double gap) {
  Tensor<double> t(std::move(shape));
  for (auto& x : t.data) {
    do {
      x = rng.uniform(-1.0, 1.0);
    } while (std::abs(x) < gap);
  }
  return V::parameter(std::move(t));
}

// Probes output y with fixed random weights and checks the listed inputs.
GradCheckResult probe(const std::function<V()>& forward,
                      const std::vector<V>& inputs,
                      const std::vector<std::string>& names, Rng& rng) {
  const std::size_t n = forward().size();
  const auto w = random_values(n, rng);
  return grad_check([&] { return weighted_sum(forward(), w); }, inputs, names);
}

// Perturbs every parameter so that layers are checked away from their
// symmetric initialization.
void jitter(const nn::ParameterList<double>& params, Rng& rng, double amount) {
  for (const auto& p : params) {
    V v = p.var;
    for (auto& x : v.mutable_data()) x += rng.uniform(-amount, amount);
  }
}

std::vector<V> vars_of(const nn::ParameterList<double>& params) {
  std::vector<V> out;
  for (const auto& p : params) out.push_back(p.var);
  return out;
}

std::vector<std::string> names_of(const nn::ParameterList<double>& params) {
  std::vector<std::string> out;
  for (const auto& p : params) out.push_back(p.name);
  return out;
}

Image random_image(int h, int w, Rng& rng) {
  Image img(h, w);
  for (auto& v : img.pixels) v = static_cast<float>(rng.uniform());
  return img;
}

std::vector<GradCase> build_op_cases() {
  std::vector<GradCase> cases;
  auto add_case = [&](std::string name,
                      std::function<GradCheckResult(Rng&)> body) {
    cases.push_back({std::move(name), kOpTolerance,
                     [body](std::uint64_t seed) {
                       Rng rng(mix_seed(seed, 0x6c0ad));
                       return body(rng);
                     }});
  };

  add_case("matmul_nt", [](Rng& rng) {
    V a = random_parameter({3, 4}, rng), b = random_parameter({5, 4}, rng);
    return probe([&] { return ops::matmul_nt(a, b); }, {a, b}, {"a", "b"}, rng);
  });
  add_case("add", [](Rng& rng) {
    V a = random_parameter({3, 4}, rng), b = random_parameter({3, 4}, rng);
    return probe([&] { return ops::add(a, b); }, {a, b}, {"a", "b"}, rng);
  });
  add_case("add_bias", [](Rng& rng) {
    V x = random_parameter({3, 4}, rng), b = random_parameter({4}, rng);
    return probe([&] { return ops::add_bias(x, b); }, {x, b}, {"x", "bias"},
                 rng);
  });
  add_case("linear", [](Rng& rng) {
    V x = random_parameter({2, 3, 4}, rng);
    V w = random_parameter({5, 4}, rng), b = random_parameter({5}, rng);
    return probe([&] { return ops::linear(x, w, b); }, {x, w, b},
                 {"x", "weight", "bias"}, rng);
  });
  add_case("scale", [](Rng& rng) {
    V x = random_parameter({3, 4}, rng);
    return probe([&] { return ops::scale(x, 0.7); }, {x}, {"x"}, rng);
  });
  add_case("gelu", [](Rng& rng) {
    V x = random_parameter({4, 5}, rng, -3.0, 3.0);
    return probe([&] { return ops::gelu(x); }, {x}, {"x"}, rng);
  });
  add_case("relu", [](Rng& rng) {
    V x = random_away_from_zero({4, 5}, rng, 1e-3);
    return probe([&] { return ops::relu(x); }, {x}, {"x"}, rng);
  });
  add_case("layer_norm", [](Rng& rng) {
    V x = random_parameter({3, 6}, rng, -2.0, 2.0);
    V g = random_parameter({6}, rng, 0.5, 1.5), s = random_parameter({6}, rng);
    return probe([&] { return ops::layer_norm(x, g, s, 1e-6); }, {x, g, s},
                 {"x", "gain", "shift"}, rng);
  });
  add_case("concat_rows", [](Rng& rng) {
    V a = random_parameter({2, 4}, rng), b = random_parameter({3, 4}, rng);
    return probe([&] { return ops::concat_rows(a, b); }, {a, b}, {"a", "b"},
                 rng);
  });
  add_case("slice_rows", [](Rng& rng) {
    V x = random_parameter({5, 4}, rng);
    return probe([&] { return ops::slice_rows(x, 1, 4); }, {x}, {"x"}, rng);
  });
  add_case("pixel_shuffle2", [](Rng& rng) {
    V x = random_parameter({6, 8}, rng);
    return probe([&] { return ops::pixel_shuffle2(x, 2, 3); }, {x}, {"x"},
                 rng);
  });
  add_case("resize_bilinear_up", [](Rng& rng) {
    V x = random_parameter({2, 12}, rng);
    return probe([&] { return ops::resize_bilinear_rows(x, 3, 4, 5, 7); }, {x},
                 {"x"}, rng);
  });
  add_case("resize_bilinear_down", [](Rng& rng) {
    V x = random_parameter({2, 30}, rng);
    return probe([&] { return ops::resize_bilinear_rows(x, 6, 5, 3, 2); }, {x},
                 {"x"}, rng);
  });
  add_case("sum", [](Rng& rng) {
    V x = random_parameter({3, 4}, rng);
    return grad_check([&] { return ops::sum(x); }, {x}, {"x"});
  });
  add_case("scaled_dot_attention", [](Rng& rng) {
    V q = random_parameter({3, 8}, rng), k = random_parameter({4, 8}, rng);
    V v = random_parameter({4, 8}, rng);
    ops::AttentionOptions opt;
    opt.num_heads = 2;
    return probe([&] { return ops::scaled_dot_attention(q, k, v, opt); },
                 {q, k, v}, {"q", "k", "v"}, rng);
  });
  add_case("softmax_cross_entropy", [](Rng& rng) {
    V logits = random_parameter({4, 5}, rng, -2.0, 2.0);
    std::vector<std::size_t> targets(4);
    for (auto& t : targets) t = rng.below(5);
    return grad_check(
        [&] { return ops::softmax_cross_entropy<double>(logits, targets); },
        {logits}, {"logits"});
  });
  add_case("sigmoid_bce", [](Rng& rng) {
    V logits = random_parameter({2, 12}, rng, -3.0, 3.0);
    const auto targets = random_bits(24, rng, 0.5);
    auto valid = random_bits(24, rng, 0.8);
    valid[0] = 1;
    return grad_check(
        [&] { return ops::sigmoid_bce<double>(logits, targets, valid); },
        {logits}, {"logits"});
  });
  add_case("dice_loss", [](Rng& rng) {
    V logits = random_parameter({1, 16}, rng, -3.0, 3.0);
    const auto targets = random_bits(16, rng, 0.4);
    auto valid = random_bits(16, rng, 0.8);
    return grad_check(
        [&] { return ops::dice_loss<double>(logits, targets, valid, 1.0); },
        {logits}, {"logits"});
  });
  add_case("max_sigmoid_bce", [](Rng& rng) {
    // Planes kept apart so the per-pixel max is locally smooth.
    const std::size_t k = 3, n = 10;
    Tensor<double> t({k, n});
    for (std::size_t p = 0; p < n; ++p) {
      bool ok = false;
      while (!ok) {
        for (std::size_t q = 0; q < k; ++q) t.at(q, p) = rng.uniform(-3, 3);
        ok = true;
        for (std::size_t a = 0; a < k; ++a) {
          for (std::size_t b = a + 1; b < k; ++b) {
            if (std::abs(t.at(a, p) - t.at(b, p)) < 1e-3) ok = false;
          }
        }
      }
    }
    V logits = V::parameter(t);
    const auto targets = random_bits(n, rng, 0.5);
    const auto valid = random_bits(n, rng, 0.9);
    return grad_check(
        [&] { return ops::max_sigmoid_bce<double>(logits, targets, valid); },
        {logits}, {"logits"});
  });

  add_case("linear_layer", [](Rng& rng) {
    auto layer = nn::Linear<double>::init(4, 3, rng);
    nn::ParameterList<double> params;
    layer.collect("fc", params, -1);
    jitter(params, rng, 0.5);
    V x = random_parameter({2, 4}, rng);
    auto inputs = vars_of(params);
    auto names = names_of(params);
    inputs.push_back(x);
    names.push_back("x");
    return probe([&] { return layer(x); }, inputs, names, rng);
  });
  add_case("multi_head_attention", [](Rng& rng) {
    auto attn = nn::MultiHeadAttention<double>::init(8, 2, 0.0, rng);
    nn::ParameterList<double> params;
    attn.collect("attn", params, -1);
    jitter(params, rng, 0.3);
    V q = random_parameter({3, 8}, rng), kv = random_parameter({4, 8}, rng);
    auto inputs = vars_of(params);
    auto names = names_of(params);
    inputs.insert(inputs.end(), {q, kv});
    names.insert(names.end(), {"q_in", "kv_in"});
    nn::ForwardContext ctx;
    return probe([&] { return attn(q, kv, ctx); }, inputs, names, rng);
  });
  add_case("encoder_block", [](Rng& rng) {
    auto block = nn::EncoderBlock<double>::init(8, 2, 4, 0.0, rng);
    nn::ParameterList<double> params;
    block.collect("block", params, -1);
    jitter(params, rng, 0.3);
    V x = random_parameter({3, 8}, rng);
    auto inputs = vars_of(params);
    auto names = names_of(params);
    inputs.push_back(x);
    names.push_back("tokens");
    nn::ForwardContext ctx;
    return probe([&] { return block(x, ctx); }, inputs, names, rng);
  });
  add_case("mlp3", [](Rng& rng) {
    auto mlp = nn::Mlp3<double>::init(6, rng);
    nn::ParameterList<double> params;
    mlp.collect("mlp", params, -1);
    jitter(params, rng, 0.5);
    V x = random_parameter({3, 6}, rng);
    auto inputs = vars_of(params);
    auto names = names_of(params);
    inputs.push_back(x);
    names.push_back("x");
    return probe([&] { return mlp(x); }, inputs, names, rng);
  });
  add_case("patch_embed", [](Rng& rng) {
    auto embed = nn::PatchEmbed<double>::init(8, 4, 6, rng);
    nn::ParameterList<double> params;
    embed.collect("embed", params, -1);
    jitter(params, rng, 0.3);
    const Image img = random_image(16, 16, rng);
    return probe([&] { return embed(img); }, vars_of(params), names_of(params),
                 rng);
  });
  add_case("upscaler", [](Rng& rng) {
    auto up = nn::Upscaler<double>::init(2, 4, rng);
    nn::ParameterList<double> params;
    up.collect("up", params, -1);
    jitter(params, rng, 0.3);
    V grid = random_parameter({4, 4}, rng);
    auto inputs = vars_of(params);
    auto names = names_of(params);
    inputs.push_back(grid);
    names.push_back("grid");
    return probe([&] { return up(grid, 2, 2); }, inputs, names, rng);
  });
  add_case("boundary_cross_attention", [](Rng& rng) {
    auto cab = BoundaryCrossAttention<double>::init(8, 2, 0.0, rng);
    nn::ParameterList<double> params;
    cab.collect("cab", params);
    jitter(params, rng, 0.3);
    V qm = random_parameter({3, 8}, rng), qb = random_parameter({3, 8}, rng);
    auto inputs = vars_of(params);
    auto names = names_of(params);
    inputs.insert(inputs.end(), {qm, qb});
    names.insert(names.end(), {"mask_queries", "boundary_queries"});
    nn::ForwardContext ctx;
    return probe([&] { return cab(qm, qb, ctx); }, inputs, names, rng);
  });
  add_case("spatial_logits", [](Rng& rng) {
    auto mlp = nn::Mlp3<double>::init(4, rng);
    auto up = nn::Upscaler<double>::init(1, 4, rng);
    nn::ParameterList<double> params;
    mlp.collect("mlp", params, -1);
    up.collect("up", params, -1);
    jitter(params, rng, 0.4);
    V queries = random_parameter({3, 4}, rng);
    V features = random_parameter({4, 4}, rng);
    auto inputs = vars_of(params);
    auto names = names_of(params);
    inputs.insert(inputs.end(), {queries, features});
    names.insert(names.end(), {"queries", "features"});
    return probe(
        [&] { return spatial_logits(queries, features, 2, 2, mlp, up); },
        inputs, names, rng);
  });
  add_case("mask_branch_loss", [](Rng& rng) {
    // Four queries, three classes plus no-object, 4x4 masks.
    PredictionSet<double> pred;
    pred.class_logits = random_parameter({4, 4}, rng, -2, 2);
    pred.mask_logits = random_parameter({4, 16}, rng, -2, 2);
    pred.logit_height = pred.logit_width = 4;
    std::vector<Segment> segments(2);
    segments[0].class_id = 1;
    segments[1].class_id = 3;
    for (auto& s : segments) s.mask = random_bits(16, rng, 0.4);
    auto valid = random_bits(16, rng, 0.9);
    const LossWeights weights;
    const MatchResult match =
        hungarian_match(match_cost(pred, segments, valid, weights));
    return grad_check(
        [&] {
          return mask_branch_loss(pred, segments, valid, match, weights);
        },
        {pred.class_logits, pred.mask_logits}, {"class_logits", "mask_logits"});
  });
  add_case("boundary_loss", [](Rng& rng) {
    V logits = random_away_from_zero({1, 12}, rng, 1e-3);
    const auto gt = random_bits(12, rng, 0.3);
    const auto valid = random_bits(12, rng, 0.9);
    return grad_check([&] { return boundary_loss(logits, gt, valid); },
                      {logits}, {"boundary_logits"});
  });
  return cases;
}

ModelConfig toy_gradient_config() {
  ModelConfig c;
  c.input_size = 32;
  c.patch_size = 8;
  c.width = 16;
  c.backbone_depth = 1;
  c.joint_depth = 1;
  c.num_queries = 2;
  c.num_heads = 2;
  c.dropout = 0.0;
  return c;
}

// `mask_size` selects the supervision resolution of the mask terms. The
// instance is redrawn (up to three times) when the check lands within a
// step of a ReLU kink.
GradCheckResult model_case(std::uint64_t seed, int mask_size, bool boundary,
                           bool cross_attention) {
  ModelConfig cfg = toy_gradient_config();
  cfg.use_boundary_branch = boundary;
  cfg.use_boundary_cross_attention = cross_attention;
  GradCheckResult r;
  for (std::uint64_t attempt = 0; attempt < 4; ++attempt) {
    const std::uint64_t s = attempt == 0 ? seed : mix_seed(seed, 1000 + attempt);
    SegmentationModel<double> model(cfg, mix_seed(s, 11));
    Rng rng(mix_seed(s, 12));
    const auto params = model.parameters();
    jitter(params, rng, 0.05);

    GeneratorConfig gen;
    gen.height = gen.width = 32;
    gen.min_blobs = 1;
    gen.max_blobs = 2;
    const Scene scene = synth_item(gen, seed, 0).scene;
    const LossTargets targets = prepare_targets(
        scene.mask, mask_size, static_cast<int>(cfg.logit_size()));
    LossWeights weights;
    weights.boundary_weight = 10.0;  // keeps both terms visible in the sum

    nn::ForwardContext ctx;
    const MatchResult match =
        compute_loss(model.forward(scene.image, ctx), targets, weights).match;
    auto objective = [&] {
      return compute_loss(model.forward(scene.image, ctx), targets, weights,
                          &match)
          .total;
    };
    GradCheckOptions opt;
    opt.max_entries_per_input = 6;
    opt.sample_seed = s;
    r = grad_check(objective, vars_of(params), names_of(params), opt);
    bool kinked = false;
    const double dir =
        directional_check(objective, vars_of(params), s, 1e-5, &kinked);
    r.nonsmooth_entries += kinked;
    if (dir > r.max_relative_error) {
      r.max_relative_error = dir;
      r.worst_input = "<random direction>";
    }
    if (r.nonsmooth_entries == 0) break;
  }
  return r;
}

std::vector<GradCase> build_model_cases() {
  return {
      {"model_end_to_end", kModelTolerance,
       [](std::uint64_t s) { return model_case(s, 8, true, true); }},
      {"model_full_resolution_targets", kModelTolerance,
       [](std::uint64_t s) { return model_case(s, 32, true, true); }},
      {"model_without_cross_attention", kModelTolerance,
       [](std::uint64_t s) { return model_case(s, 8, true, false); }},
      {"model_single_branch", kModelTolerance,
       [](std::uint64_t s) { return model_case(s, 8, false, false); }},
  };
}

}  // namespace

const std::vector<GradCase>& op_grad_cases() {
  static const std::vector<GradCase> cases = build_op_cases();
  return cases;
}

const std::vector<GradCase>& model_grad_cases() {
  static const std::vector<GradCase> cases = build_model_cases();
  return cases;
}

}  // namespace liquidseg::testing
