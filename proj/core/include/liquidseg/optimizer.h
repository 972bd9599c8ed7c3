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

#ifndef LIQUIDSEG_OPTIMIZER_H_
#define LIQUIDSEG_OPTIMIZER_H_

#include <cstdint>
#include <vector>

#include "liquidseg/layers.h"

namespace liquidseg {

struct AdamWConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.05;
  double layer_decay = 0.8;  // multiplier per unit of lr_depth
  double grad_clip = 0.0;    // global L2 norm; 0 disables

  void validate() const;
  bool operator==(const AdamWConfig&) const = default;
};

// Adam with decoupled weight decay. Parameter i uses
// lr * layer_decay^lr_depth (base rate when lr_depth < 0) and is decayed
// only if its weight_decay flag is set.
template <typename T>
class AdamW {
 public:
  AdamW(nn::ParameterList<T> params, const AdamWConfig& config);

  double learning_rate(std::size_t i) const;
  // Multiplies every rate (schedules); 1 by default.
  void set_rate_scale(double scale) { rate_scale_ = scale; }
  // Applies one update from the accumulated gradients (missing gradients
  // count as zero), then clears them. Returns the pre-clip global norm.
  double step();
  void zero_grad();

  std::int64_t steps() const { return t_; }
  const nn::ParameterList<T>& parameters() const { return params_; }

 private:
  nn::ParameterList<T> params_;
  AdamWConfig config_;
  std::vector<std::vector<double>> m_, v_;
  std::int64_t t_ = 0;
  double rate_scale_ = 1.0;
};

}  // namespace liquidseg

#endif  // LIQUIDSEG_OPTIMIZER_H_
