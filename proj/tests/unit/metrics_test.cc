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

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "liquidseg/metrics.h"
#include "oracles.h"

namespace liquidseg {
namespace {

LabelMap map2x2(std::vector<std::uint8_t> v) {
  LabelMap m(2, 2);
  m.labels = std::move(v);
  return m;
}

TEST(ConfusionTest, PerfectPredictionHasNoErrors) {
  Rng rng(1);
  const LabelMap gt = testing::random_label_map(8, 8, 15, rng);
  ConfusionAccumulator acc;
  acc.accumulate(gt, gt);
  for (int c = 1; c <= 14; ++c) {
    EXPECT_EQ(acc.fp(c), 0u);
    EXPECT_EQ(acc.fn(c), 0u);
  }
  const auto r = per_class_report(acc);
  for (const auto& c : r.classes) {
    if (c.iou) EXPECT_EQ(*c.iou, 1.0);
  }
}

TEST(ConfusionTest, HandCount) {
  ConfusionAccumulator acc;
  acc.accumulate(map2x2({1, 0, 0, 0}), map2x2({1, 1, 0, 0}));
  EXPECT_EQ(acc.tp(1), 1u);
  EXPECT_EQ(acc.fp(1), 0u);
  EXPECT_EQ(acc.fn(1), 1u);
  EXPECT_EQ(acc.evaluated_pixels(), 4u);
}

TEST(ConfusionTest, IgnorePixelsSkipped) {
  ConfusionAccumulator acc;
  acc.accumulate(map2x2({1, 2, 3, 4}), map2x2({kIgnoreLabel, 2, kIgnoreLabel, 0}));
  EXPECT_EQ(acc.evaluated_pixels(), 2u);
  EXPECT_EQ(acc.tp(2), 1u);
  EXPECT_EQ(acc.fp(1), 0u);
  EXPECT_EQ(acc.fp(4), 1u);
}

TEST(ConfusionTest, ShapeMismatchRejected) {
  ConfusionAccumulator acc;
  EXPECT_THROW(acc.accumulate(LabelMap(2, 2), LabelMap(2, 3)),
               std::invalid_argument);
}

TEST(ConfusionTest, OrderAndMergeInvariance) {
  Rng rng(2);
  std::vector<LabelMap> preds, gts;
  for (int i = 0; i < 6; ++i) {
    preds.push_back(testing::random_label_map(5, 7, 15, rng));
    gts.push_back(testing::random_label_map(5, 7, 15, rng));
  }
  ConfusionAccumulator forward, backward, left, right;
  for (int i = 0; i < 6; ++i) forward.accumulate(preds[i], gts[i]);
  for (int i = 5; i >= 0; --i) backward.accumulate(preds[i], gts[i]);
  for (int i = 0; i < 3; ++i) left.accumulate(preds[i], gts[i]);
  for (int i = 3; i < 6; ++i) right.accumulate(preds[i], gts[i]);
  EXPECT_EQ(forward, backward);
  ConfusionAccumulator merged = left;
  merged.merge(right);
  EXPECT_EQ(merged, forward);
  ConfusionAccumulator merged2 = right;
  merged2.merge(left);
  EXPECT_EQ(merged2, forward);

  // Streaming equals one pass over the concatenated pixels.
  LabelMap cp(30, 7), cg(30, 7);
  for (int i = 0; i < 6; ++i) {
    std::copy(preds[i].labels.begin(), preds[i].labels.end(),
              cp.labels.begin() + i * 35);
    std::copy(gts[i].labels.begin(), gts[i].labels.end(),
              cg.labels.begin() + i * 35);
  }
  ConfusionAccumulator single;
  single.accumulate(cp, cg);
  EXPECT_EQ(single, forward);
}

TEST(ReportTest, FormulaArithmetic) {
  ConfusionAccumulator acc;
  acc.accumulate(map2x2({1, 0, 0, 0}), map2x2({1, 1, 0, 0}));
  const auto r = per_class_report(acc);
  const auto& c1 = r.classes[0];
  EXPECT_EQ(c1.label, 1);
  EXPECT_EQ(*c1.iou, 0.5);
  EXPECT_EQ(*c1.pa, 0.5);
  EXPECT_EQ(*c1.precision, 1.0);
  EXPECT_DOUBLE_EQ(*c1.f1, 2.0 / 3.0);
  EXPECT_FALSE(r.classes[1].iou.has_value());
  EXPECT_EQ(*r.mean_iou, 0.5);
}

TEST(ReportTest, EqualPrecisionAndRecall) {
  // tp = 1, fp = 1, fn = 1
  ConfusionAccumulator acc;
  acc.accumulate(map2x2({3, 3, 0, 0}), map2x2({3, 0, 3, 0}));
  const auto c = per_class_report(acc).classes[2];
  EXPECT_EQ(*c.precision, 0.5);
  EXPECT_EQ(*c.pa, 0.5);
  EXPECT_EQ(*c.f1, 0.5);
}

TEST(ReportTest, UndefinedRatiosAbsent) {
  ConfusionAccumulator acc;
  acc.accumulate(map2x2({0, 0, 0, 0}), map2x2({0, 0, 0, 0}));
  const auto r = per_class_report(acc);
  EXPECT_FALSE(r.mean_iou.has_value());
  // Class predicted but never present: precision 0, recall undefined.
  ConfusionAccumulator fp_only;
  fp_only.accumulate(map2x2({2, 0, 0, 0}), map2x2({0, 0, 0, 0}));
  const auto c = per_class_report(fp_only).classes[1];
  EXPECT_EQ(*c.iou, 0.0);
  EXPECT_EQ(*c.precision, 0.0);
  EXPECT_FALSE(c.pa.has_value());
}

TEST(ReportTest, MatchesBruteForceCountsExactly) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    LabelMap p = testing::random_label_map(12, 9, 15, rng);
    LabelMap g = testing::random_label_map(12, 9, 15, rng);
    for (auto& v : g.labels) {
      if (rng.bernoulli(0.05)) v = kIgnoreLabel;
    }
    ConfusionAccumulator acc;
    acc.accumulate(p, g);
    const auto oracle = testing::brute_force_counts({p}, {g}, 14);
    const auto r = per_class_report(acc);
    for (const auto& c : r.classes) {
      const auto tp = oracle.tp[c.label], fp = oracle.fp[c.label],
                 fn = oracle.fn[c.label];
      ASSERT_EQ(c.tp, tp);
      ASSERT_EQ(c.fp, fp);
      ASSERT_EQ(c.fn, fn);
      if (tp + fp + fn) {
        EXPECT_EQ(*c.iou, double(tp) / double(tp + fp + fn));
        EXPECT_EQ(*c.f1, double(2 * tp) / double(2 * tp + fp + fn));
        EXPECT_LE(*c.iou, c.pa.value_or(1.0));
        EXPECT_LE(*c.iou, c.precision.value_or(1.0));
        EXPECT_NEAR(*c.f1, 2 * *c.iou / (1 + *c.iou), 1e-12);
      }
    }
  }
}

TEST(ReportTest, CsvLayout) {
  ConfusionAccumulator acc;
  acc.accumulate(map2x2({1, 0, 0, 0}), map2x2({1, 1, 0, 0}));
  std::ostringstream out;
  write_report_csv(out, per_class_report(acc));
  std::istringstream in(out.str());
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 16u);
  EXPECT_EQ(lines[0], "class,iou,pa,precision,f1");
  EXPECT_EQ(lines[1].rfind("water,", 0), 0u);
  EXPECT_EQ(lines[2], "wine,,,,");
  EXPECT_EQ(lines[14].rfind("misc", 0), 0u);
  EXPECT_EQ(lines[15].rfind("mean,", 0), 0u);
  const auto& names = liquid_class_names();
  EXPECT_EQ(names[7], "boba");
  std::ostringstream table;
  write_report_table(table, per_class_report(acc));
  EXPECT_NE(table.str().find("water"), std::string::npos);
}

TEST(EasyHardTest, SplitReports) {
  ConfusionAccumulator easy, hard;
  easy.accumulate(map2x2({1, 1, 0, 0}), map2x2({1, 1, 0, 0}));
  const auto r = easy_hard_eval(easy, hard);
  EXPECT_EQ(*r.easy.mean_iou, 1.0);
  EXPECT_FALSE(r.hard.mean_iou.has_value());
}

}  // namespace
}  // namespace liquidseg
