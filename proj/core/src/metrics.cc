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

#include "liquidseg/metrics.h"

#include <cstdio>
#include <iomanip>
#include <stdexcept>

namespace liquidseg {
namespace {

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::optional<double> mean_of(const std::vector<ClassMetrics>& classes,
                              std::optional<double> ClassMetrics::*field) {
  double sum = 0;
  int n = 0;
  for (const auto& c : classes) {
    if (c.*field) {
      sum += *(c.*field);
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

std::string fmt(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", *v);
  return buf;
}

}  // namespace

const std::array<std::string, kNumLiquidClasses>& liquid_class_names() {
  static const std::array<std::string, kNumLiquidClasses> names = {
      "water", "wine",     "juice",   "cocktails", "soda",
      "coffee", "tea",     "boba",    "chemical",  "medical",
      "milk",  "spirits",  "honey",   "misc"};
  return names;
}

ConfusionAccumulator::ConfusionAccumulator(int num_classes)
    : num_classes_(num_classes),
      tp_(num_classes + 1, 0),
      fp_(num_classes + 1, 0),
      fn_(num_classes + 1, 0) {
  if (num_classes < 1 || num_classes > 254) {
    throw std::invalid_argument("ConfusionAccumulator: bad class count");
  }
}

void ConfusionAccumulator::accumulate(const LabelMap& pred, const LabelMap& gt) {
  if (pred.height != gt.height || pred.width != gt.width) {
    throw std::invalid_argument(
        "accumulate: prediction " + std::to_string(pred.height) + "x" +
        std::to_string(pred.width) + " vs ground truth " +
        std::to_string(gt.height) + "x" + std::to_string(gt.width));
  }
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    const int g = gt.labels[i];
    if (g == kIgnoreLabel) continue;
    const int p = pred.labels[i];
    ++evaluated_;
    if (p == g) {
      if (g >= 1 && g <= num_classes_) ++tp_[g];
      continue;
    }
    if (p >= 1 && p <= num_classes_) ++fp_[p];
    if (g >= 1 && g <= num_classes_) ++fn_[g];
  }
}

void ConfusionAccumulator::merge(const ConfusionAccumulator& other) {
  if (other.num_classes_ != num_classes_) {
    throw std::invalid_argument("merge: class counts differ");
  }
  for (int c = 0; c <= num_classes_; ++c) {
    tp_[c] += other.tp_[c];
    fp_[c] += other.fp_[c];
    fn_[c] += other.fn_[c];
  }
  evaluated_ += other.evaluated_;
}

MetricReport per_class_report(const ConfusionAccumulator& acc) {
  MetricReport report;
  const auto& names = liquid_class_names();
  for (int c = 1; c <= acc.num_classes(); ++c) {
    ClassMetrics m;
    m.label = c;
    m.name = c <= kNumLiquidClasses ? names[c - 1] : "class" + std::to_string(c);
    m.tp = acc.tp(c);
    m.fp = acc.fp(c);
    m.fn = acc.fn(c);
    m.iou = ratio(m.tp, m.tp + m.fp + m.fn);
    m.pa = ratio(m.tp, m.tp + m.fn);
    m.precision = ratio(m.tp, m.tp + m.fp);
    m.f1 = ratio(2 * m.tp, 2 * m.tp + m.fp + m.fn);
    report.classes.push_back(std::move(m));
  }
  report.mean_iou = mean_of(report.classes, &ClassMetrics::iou);
  report.mean_pa = mean_of(report.classes, &ClassMetrics::pa);
  report.mean_precision = mean_of(report.classes, &ClassMetrics::precision);
  report.mean_f1 = mean_of(report.classes, &ClassMetrics::f1);
  return report;
}

void write_report_csv(std::ostream& out, const MetricReport& report) {
  out << "class,iou,pa,precision,f1\n";
  for (const auto& c : report.classes) {
    out << c.name << ',' << fmt(c.iou) << ',' << fmt(c.pa) << ','
        << fmt(c.precision) << ',' << fmt(c.f1) << '\n';
  }
  out << "mean," << fmt(report.mean_iou) << ',' << fmt(report.mean_pa) << ','
      << fmt(report.mean_precision) << ',' << fmt(report.mean_f1) << '\n';
}

void write_report_table(std::ostream& out, const MetricReport& report) {
  auto cell = [](const std::optional<double>& v) {
    if (!v) return std::string("      -");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%7.2f", 100.0 * *v);
    return std::string(buf);
  };
  out << std::left << std::setw(10) << "class" << "    IoU     PA   Prec     F1\n";
  for (const auto& c : report.classes) {
    if (c.tp + c.fp + c.fn == 0) continue;
    out << std::left << std::setw(10) << c.name << cell(c.iou) << cell(c.pa)
        << cell(c.precision) << cell(c.f1) << '\n';
  }
  out << std::left << std::setw(10) << "mean" << cell(report.mean_iou)
      << cell(report.mean_pa) << cell(report.mean_precision)
      << cell(report.mean_f1) << '\n';
}

EasyHardReport easy_hard_eval(const ConfusionAccumulator& easy,
                              const ConfusionAccumulator& hard) {
  return {per_class_report(easy), per_class_report(hard)};
}

}  // namespace liquidseg
