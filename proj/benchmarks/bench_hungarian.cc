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

#include "liquidseg/hungarian.h"
#include "liquidseg/rng.h"

namespace liquidseg {
namespace {

// Rows are ground-truth segments, columns queries.
void BM_Hungarian(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto cols = static_cast<std::size_t>(state.range(1));
  CostMatrix c(rows, cols);
  Rng rng(3);
  for (auto& v : c.values) v = rng.uniform(-5, 5);
  for (auto _ : state) benchmark::DoNotOptimize(hungarian_match(c).total_cost);
}
BENCHMARK(BM_Hungarian)->Args({4, 8})->Args({14, 100})->Args({100, 100});

}  // namespace
}  // namespace liquidseg

BENCHMARK_MAIN();
