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

#ifndef LIQUIDSEG_METRICS_H_
#define LIQUIDSEG_METRICS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "liquidseg/image.h"

namespace liquidseg {

// Display names for labels 1..14, in label order.
const std::array<std::string, kNumLiquidClasses>& liquid_class_names();

// Per-class pixel counts for classes 1..num_classes. Background and ignore
// pixels in the ground truth are evaluated, but only object classes are
// tallied.
class ConfusionAccumulator {
 public:
  explicit ConfusionAccumulator(int num_classes = kNumLiquidClasses);

  // Pixels whose ground truth is the ignore label are skipped.
  void accumulate(const LabelMap& pred, const LabelMap& gt);
  void merge(const ConfusionAccumulator& other);

  int num_classes() const { return num_classes_; }
  std::uint64_t tp(int c) const { return tp_[c]; }
  std::uint64_t fp(int c) const { return fp_[c]; }
  std::uint64_t fn(int c) const { return fn_[c]; }
  std::uint64_t evaluated_pixels() const { return evaluated_; }

  bool operator==(const ConfusionAccumulator&) const = default;

 private:
  int num_classes_;
  // index 0 unused so that index == label
  std::vector<std::uint64_t> tp_, fp_, fn_;
  std::uint64_t evaluated_ = 0;
};

struct ClassMetrics {
  int label = 0;
  std::string name;
  std::uint64_t tp = 0, fp = 0, fn = 0;
  // Absent when the ratio's denominator is zero.
  std::optional<double> iou, pa, precision, f1;
};

struct MetricReport {
  std::vector<ClassMetrics> classes;  // labels 1..C
  // Means over classes where the value is defined; absent if none are.
  std::optional<double> mean_iou, mean_pa, mean_precision, mean_f1;
};

// IoU = tp/(tp+fp+fn), PA = tp/(tp+fn) (class recall),
// precision = tp/(tp+fp), F1 = 2 tp / (2 tp + fp + fn).
MetricReport per_class_report(const ConfusionAccumulator& acc);

// CSV: header "class,iou,pa,precision,f1", one row per class in label
// order, then "mean". Absent values are empty fields.
void write_report_csv(std::ostream& out, const MetricReport& report);
void write_report_table(std::ostream& out, const MetricReport& report);

struct EasyHardReport {
  MetricReport easy;
  MetricReport hard;
};

EasyHardReport easy_hard_eval(const ConfusionAccumulator& easy,
                              const ConfusionAccumulator& hard);

}  // namespace liquidseg

#endif  // LIQUIDSEG_METRICS_H_
