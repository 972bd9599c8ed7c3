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

#include "liquidseg/optimizer.h"

#include <cmath>
#include <stdexcept>

namespace liquidseg {

void AdamWConfig::validate() const {
  if (!(lr > 0)) throw std::invalid_argument("optimizer: lr must be > 0");
  if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1) {
    throw std::invalid_argument("optimizer: betas must be in [0, 1)");
  }
  if (!(eps > 0)) throw std::invalid_argument("optimizer: eps must be > 0");
  if (weight_decay < 0) throw std::invalid_argument("optimizer: weight_decay must be >= 0");
  if (!(layer_decay > 0) || layer_decay > 1) {
    throw std::invalid_argument("optimizer: layer_decay must be in (0, 1]");
  }
  if (grad_clip < 0) throw std::invalid_argument("optimizer: grad_clip must be >= 0");
}

template <typename T>
AdamW<T>::AdamW(nn::ParameterList<T> params, const AdamWConfig& config)
    : params_(std::move(params)), config_(config) {
  config_.validate();
  for (const auto& p : params_) {
    m_.emplace_back(p.var.size(), 0.0);
    v_.emplace_back(p.var.size(), 0.0);
  }
}

template <typename T>
double AdamW<T>::learning_rate(std::size_t i) const {
  const int depth = params_[i].lr_depth;
  const double lr = rate_scale_ * config_.lr;
  return depth < 0 ? lr : lr * std::pow(config_.layer_decay, depth);
}

template <typename T>
double AdamW<T>::step() {
  ++t_;
  double sq = 0;
  for (auto& p : params_) {
    for (T g : p.var.node()->grad) sq += static_cast<double>(g) * g;
  }
  const double norm = std::sqrt(sq);
  const double clip = config_.grad_clip > 0 && norm > config_.grad_clip
                          ? config_.grad_clip / norm
                          : 1.0;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& node = *params_[i].var.node();
    const bool has_grad = !node.grad.empty();
    const double lr = learning_rate(i);
    const double decay = params_[i].weight_decay ? lr * config_.weight_decay : 0.0;
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < node.value.data.size(); ++j) {
      const double g = has_grad ? clip * static_cast<double>(node.grad[j]) : 0.0;
      m[j] = config_.beta1 * m[j] + (1 - config_.beta1) * g;
      v[j] = config_.beta2 * v[j] + (1 - config_.beta2) * g * g;
      double w = static_cast<double>(node.value.data[j]);
      w -= decay * w;
      w -= lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + config_.eps);
      node.value.data[j] = static_cast<T>(w);
    }
  }
  zero_grad();
  return norm;
}

template <typename T>
void AdamW<T>::zero_grad() {
  for (auto& p : params_) p.var.node()->grad.clear();
}

template class AdamW<float>;
template class AdamW<double>;

}  // namespace liquidseg
