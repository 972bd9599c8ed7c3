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

#include "liquidseg/boundary.h"
#include "liquidseg/synth.h"

namespace liquidseg {
namespace {

void BM_BoundaryFromMask(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  GeneratorConfig g;
  g.height = g.width = size;
  g.max_blobs = 4;
  const LabelMap mask = synth_item(g, 2, 0).scene.mask;
  const int t = boundary_thickness(size, size);
  for (auto _ : state) benchmark::DoNotOptimize(boundary_from_mask(mask, t).values.data());
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_BoundaryFromMask)->Arg(128)->Arg(512)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace liquidseg

BENCHMARK_MAIN();
