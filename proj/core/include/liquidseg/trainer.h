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

#ifndef LIQUIDSEG_TRAINER_H_
#define LIQUIDSEG_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "liquidseg/augment.h"
#include "liquidseg/dataset.h"
#include "liquidseg/loss.h"
#include "liquidseg/metrics.h"
#include "liquidseg/model.h"
#include "liquidseg/run_config.h"

namespace liquidseg {

// Random-access image/mask pairs with stable ids.
class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual std::size_t size() const = 0;
  virtual Sample get(std::size_t i) const = 0;
  virtual std::string id(std::size_t i) const = 0;
  virtual std::string difficulty(std::size_t) const { return ""; }
};

class InMemorySource : public SampleSource {
 public:
  InMemorySource() = default;
  void add(std::string id, Sample sample, std::string difficulty = "");
  std::size_t size() const override { return samples_.size(); }
  Sample get(std::size_t i) const override { return samples_[i]; }
  std::string id(std::size_t i) const override { return ids_[i]; }
  std::string difficulty(std::size_t i) const override { return difficulty_[i]; }

 private:
  std::vector<Sample> samples_;
  std::vector<std::string> ids_;
  std::vector<std::string> difficulty_;
};

// Reads files on every access.
class DiskSource : public SampleSource {
 public:
  explicit DiskSource(std::vector<DatasetRecord> records)
      : records_(std::move(records)) {}
  std::size_t size() const override { return records_.size(); }
  Sample get(std::size_t i) const override;
  std::string id(std::size_t i) const override { return records_[i].id; }
  std::string difficulty(std::size_t i) const override {
    return records_[i].difficulty;
  }

 private:
  std::vector<DatasetRecord> records_;
};

struct StepRecord {
  long long step = 0;
  int epoch = 0;
  // Batch means.
  double total = 0, mask_loss = 0, boundary_loss = 0;
  double class_ce = 0, mask_bce = 0, mask_dice = 0;
  double grad_norm = 0;
};

struct EvalRecord {
  int epoch = 0;
  long long step = 0;
  std::optional<double> mean_iou, mean_pa;
};

struct TrainerOptions {
  TrainSettings settings;
  AugmentConfig augment;
  LossWeights loss;
  std::uint64_t seed = 0;
  // Empty: nothing is written. Otherwise loss_log.csv, eval_log.csv,
  // best.ckpt and last.ckpt (each with a .manifest) land here.
  std::filesystem::path output_dir;
  std::function<void(const StepRecord&)> on_step;
  std::function<void(const EvalRecord&)> on_eval;
};

struct TrainOutcome {
  std::vector<StepRecord> steps;
  std::vector<EvalRecord> evals;
  std::optional<double> best_mean_iou;
};

class NonFiniteLossError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-sample seeds derive from (seed, sample id, epoch), so results do not
// depend on anything but the config. Steps are optimizer updates over
// batch_size samples; a run lasts max_steps if set, else epochs full
// passes. `holdout` (optional) is evaluated at each epoch end and at the
// last step; the best mean IoU checkpoint is kept.
TrainOutcome train_model(SegmentationModel<float>& model,
                         const SampleSource& train,
                         const SampleSource* holdout,
                         const TrainerOptions& options);

struct EvalResult {
  ConfusionAccumulator all;
  ConfusionAccumulator easy;
  ConfusionAccumulator hard;
  std::vector<LabelMap> predictions;  // only when requested
};

// Sliding-window inference plus confusion counting over every sample.
EvalResult evaluate_model(const SegmentationModel<float>& model,
                          const SampleSource& source,
                          bool keep_predictions = false);

// Loss of the first sample under the seeded pipeline, without updating
// anything: the quantity compared by determinism checks.
double initial_loss(const SegmentationModel<float>& model,
                    const SampleSource& train, const TrainerOptions& options);

}  // namespace liquidseg

#endif  // LIQUIDSEG_TRAINER_H_
