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

#include <benchmark/benchmark.h>

#include "liquidseg/loss.h"
#include "liquidseg/model.h"
#include "liquidseg/synth.h"

namespace liquidseg {
namespace {

ModelConfig bench_config(std::size_t input, std::size_t width) {
  ModelConfig c;
  c.input_size = input;
  c.patch_size = 16;
  c.width = width;
  c.backbone_depth = 2;
  c.joint_depth = 2;
  c.num_queries = 8;
  c.num_heads = 4;
  c.dropout = 0.0;
  return c;
}

Scene bench_scene(int size) {
  GeneratorConfig g;
  g.height = g.width = size;
  return synth_item(g, 1, 0).scene;
}

void BM_Forward(benchmark::State& state) {
  const auto input = static_cast<std::size_t>(state.range(0));
  const SegmentationModel<float> model(bench_config(input, 32), 1);
  const Scene scene = bench_scene(static_cast<int>(input));
  for (auto _ : state) {
    auto pred = model.forward(scene.image, {});
    benchmark::DoNotOptimize(pred.mask_logits.data().data());
  }
}
BENCHMARK(BM_Forward)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  const auto input = static_cast<std::size_t>(state.range(0));
  const SegmentationModel<float> model(bench_config(input, 32), 1);
  const Scene scene = bench_scene(static_cast<int>(input));
  const int logit = static_cast<int>(model.config().logit_size());
  const LossTargets targets = prepare_targets(scene.mask, logit, logit);
  const auto params = model.parameters();
  for (auto _ : state) {
    const auto loss = compute_loss(model.forward(scene.image, {}), targets, LossWeights{});
    backward(loss.total);
    for (auto p : params) p.var.zero_grad();
  }
}
BENCHMARK(BM_TrainStep)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace liquidseg

BENCHMARK_MAIN();
