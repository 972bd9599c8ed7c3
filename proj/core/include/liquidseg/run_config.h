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

#ifndef LIQUIDSEG_RUN_CONFIG_H_
#define LIQUIDSEG_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>

#include "liquidseg/augment.h"
#include "liquidseg/config.h"
#include "liquidseg/loss.h"
#include "liquidseg/model.h"
#include "liquidseg/optimizer.h"
#include "liquidseg/synth.h"

namespace liquidseg {

enum class LrSchedule { kConstant, kCosine };

struct TrainSettings {
  AdamWConfig optimizer;
  LrSchedule schedule = LrSchedule::kConstant;  // cosine anneals to 0
  int epochs = 16;
  int batch_size = 4;
  long long max_steps = 0;  // 0: run all epochs
  bool augment = true;
  bool eval_each_epoch = true;
  // Mask terms against input-resolution targets (logits bilinearly
  // upsampled) instead of nearest-downsampled targets at logit resolution.
  // The boundary term stays at logit resolution either way.
  bool full_resolution_targets = false;
  bool operator==(const TrainSettings&) const = default;
};

// Every knob of every subcommand. Keys are documented in
// configs/reference.cfg; `to_config()` emits all of them.
struct RunConfig {
  ModelConfig model;
  AugmentConfig augment;
  GeneratorConfig generator;
  TrainSettings train;
  LossWeights loss;
  std::uint64_t seed = 0;

  std::filesystem::path data_root;
  std::filesystem::path output_dir = "run";
  std::filesystem::path checkpoint;   // eval / infer input
  std::filesystem::path infer_input;  // image file or directory
  std::string eval_split = "test";
  bool easy_hard = false;
  bool colorize = false;
  double split_ratio = 0.84;
  int synth_count = 50;
  int stats_grid = 64;
  int stats_bins = 10;

  // Unknown keys and malformed values raise ConfigError; range violations
  // raise std::invalid_argument.
  static RunConfig from_config(const KeyValueConfig& cfg);
  KeyValueConfig to_config() const;

  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

// `output_dir` resolved against `root` when relative and `root` is set.
std::filesystem::path resolve_output_dir(const RunConfig& cfg,
                                         const std::string& root);

// Model-shape keys only, written next to each checkpoint as
// <checkpoint>.manifest.
KeyValueConfig model_manifest(const ModelConfig& model);
void write_model_manifest(const std::filesystem::path& checkpoint,
                          const ModelConfig& model);

class ManifestMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws ManifestMismatch naming every differing key, or ConfigError if the
// manifest is missing.
void check_model_manifest(const std::filesystem::path& checkpoint,
                          const ModelConfig& model);

}  // namespace liquidseg

#endif  // LIQUIDSEG_RUN_CONFIG_H_
