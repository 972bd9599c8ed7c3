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

#include <cmath>
#include <numeric>

#include "liquidseg/loss.h"
#include "gradcheck.h"
#include "oracles.h"

namespace liquidseg {
namespace {

using V = Var<double>;

double softplus(double x) { return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

PredictionSet<double> make_pred(std::size_t k, std::size_t classes,
                                std::size_t side, Rng& rng) {
  PredictionSet<double> p;
  p.class_logits = testing::random_parameter({k, classes + 1}, rng, -2, 2);
  p.mask_logits = testing::random_parameter({k, side * side}, rng, -2, 2);
  p.logit_height = p.logit_width = side;
  return p;
}

CostMatrix random_cost(std::size_t rows, std::size_t cols, Rng& rng,
                       bool integer) {
  CostMatrix c(rows, cols);
  for (auto& v : c.values) {
    v = integer ? static_cast<double>(rng.below(10)) : rng.uniform(-5, 5);
  }
  return c;
}

TEST(SegmentsTest, Examples) {
  EXPECT_TRUE(gt_to_segments(LabelMap(4, 4)).empty());
  LabelMap m(3, 3);
  m.at(0, 0) = 6;
  m.at(1, 1) = 1;
  m.at(2, 2) = 1;
  m.at(2, 0) = kIgnoreLabel;
  const auto segs = gt_to_segments(m);
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_EQ(segs[0].class_id, 1);
  EXPECT_EQ(segs[1].class_id, 6);
}

TEST(SegmentsTest, PixelCountsSumToForeground) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const LabelMap m = testing::random_label_map(9, 11, 15, rng);
    std::size_t fg = 0;
    for (auto v : m.labels) fg += v != 0;
    std::size_t total = 0;
    for (const auto& s : gt_to_segments(m)) {
      total += std::accumulate(s.mask.begin(), s.mask.end(), std::size_t{0});
    }
    EXPECT_EQ(total, fg);
  }
}

TEST(HungarianTest, SmallExamples) {
  CostMatrix diag(2, 2);
  diag.values = {1, 2, 2, 1};
  auto r = hungarian_match(diag);
  EXPECT_EQ(r.assignment, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(r.total_cost, 2.0);
  CostMatrix anti(2, 2);
  anti.values = {1, 0, 0, 1};
  r = hungarian_match(anti);
  EXPECT_EQ(r.assignment, (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(r.total_cost, 0.0);
}

TEST(HungarianTest, RejectsMoreRowsThanColumnsAndNonFinite) {
  EXPECT_THROW(hungarian_match(CostMatrix(3, 2)), std::invalid_argument);
  CostMatrix c(1, 2);
  c.values = {1.0, NAN};
  EXPECT_THROW(hungarian_match(c), std::invalid_argument);
}

TEST(HungarianTest, EmptyMatrix) {
  const auto r = hungarian_match(CostMatrix(0, 3));
  EXPECT_TRUE(r.assignment.empty());
  EXPECT_EQ(r.total_cost, 0.0);
}

TEST(HungarianTest, TiesGoToLowestQuery) {
  const auto r = hungarian_match(CostMatrix(1, 4));
  EXPECT_EQ(r.assignment, (std::vector<std::size_t>{0}));
}

TEST(HungarianTest, FiveByEightMatchesEnumeration) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const CostMatrix c = random_cost(5, 8, rng, false);
    const auto r = hungarian_match(c);
    ASSERT_TRUE(testing::is_injective(r.assignment, 8));
    EXPECT_NEAR(r.total_cost, testing::brute_force_assignment_cost(c), 1e-12);
    EXPECT_NEAR(testing::assignment_cost(c, r.assignment), r.total_cost, 1e-12);
  }
}

TEST(HungarianTest, IntegerCostsExactUpToSixRows) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Rng rng(seed);
    const std::size_t rows = 1 + rng.below(6);
    const std::size_t cols = rows + rng.below(9 - rows);
    const CostMatrix c = random_cost(rows, cols, rng, true);
    const auto r = hungarian_match(c);
    ASSERT_TRUE(testing::is_injective(r.assignment, cols));
    EXPECT_EQ(r.total_cost, testing::brute_force_assignment_cost(c));
    EXPECT_EQ(testing::assignment_cost(c, r.assignment), r.total_cost);
  }
}

TEST(MatchCostTest, PerfectPredictionCostsZero) {
  PredictionSet<double> p;
  p.class_logits = V::constant(Tensor<double>({1, 3}, {0, 200, 0}));
  p.mask_logits = V::constant(Tensor<double>({1, 4}, {200, 200, -200, -200}));
  p.logit_height = p.logit_width = 2;
  std::vector<Segment> segs(1);
  segs[0].class_id = 2;
  segs[0].mask = {1, 1, 0, 0};
  LossWeights w;
  w.dice_eps = 1e-12;
  const auto c = match_cost(p, segs, {}, w);
  EXPECT_NEAR(c.at(0, 0), 0.0, 1e-9);
}

TEST(MatchCostTest, FiniteForRandomLogits) {
  Rng rng(1);
  auto p = make_pred(6, 14, 4, rng);
  const auto segs = gt_to_segments(testing::random_label_map(4, 4, 15, rng));
  const auto c = match_cost(p, segs, {}, LossWeights{});
  for (double v : c.values) EXPECT_TRUE(std::isfinite(v));
}

TEST(MatchCostTest, DecreasesAsMaskApproachesTruth) {
  std::vector<Segment> segs(1);
  segs[0].class_id = 1;
  segs[0].mask = {1, 0};
  double prev = INFINITY;
  for (double a = -3; a <= 3; a += 0.5) {
    PredictionSet<double> p;
    p.class_logits = V::constant(Tensor<double>({1, 2}, {0, 0}));
    p.mask_logits = V::constant(Tensor<double>({1, 2}, {a, -a}));
    p.logit_height = 1;
    p.logit_width = 2;
    const double c = match_cost(p, segs, {}, LossWeights{}).at(0, 0);
    EXPECT_LT(c, prev);
    prev = c;
  }
}

TEST(MatchCostTest, WeightsOfComponents) {
  // cost = 2 CE + 5 BCE + 5 dice on a single pixel.
  PredictionSet<double> p;
  p.class_logits = V::constant(Tensor<double>({1, 2}, {0.3, -0.4}));
  p.mask_logits = V::constant(Tensor<double>({1, 1}, {0.7}));
  p.logit_height = p.logit_width = 1;
  std::vector<Segment> segs(1);
  segs[0].class_id = 1;
  segs[0].mask = {1};
  const double ce = std::log(std::exp(0.3) + std::exp(-0.4)) - 0.3;
  const double bce = softplus(-0.7);
  const double s = sigmoid(0.7);
  const double dice = 1.0 - (2 * s + 1) / (s + 1 + 1);
  EXPECT_NEAR(match_cost(p, segs, {}, LossWeights{}).at(0, 0),
              2 * ce + 5 * bce + 5 * dice, 1e-12);
}

TEST(MaskLossTest, ScalarHandComputation) {
  PredictionSet<double> p;
  p.class_logits = V::parameter(Tensor<double>({1, 2}, {1.2, -0.3}));
  p.mask_logits = V::parameter(Tensor<double>({1, 1}, {-0.6}));
  p.logit_height = p.logit_width = 1;
  std::vector<Segment> segs(1);
  segs[0].class_id = 1;
  segs[0].mask = {1};
  MatchResult m;
  m.assignment = {0};
  LossBreakdown<double> parts;
  const double got =
      mask_branch_loss(p, segs, {}, m, LossWeights{}, &parts).item();
  const double ce = std::log(std::exp(1.2) + std::exp(-0.3)) - 1.2;
  const double bce = softplus(0.6);
  const double s = sigmoid(-0.6);
  const double dice = 1.0 - (2 * s + 1) / (s + 1 + 1);
  EXPECT_NEAR(got, 2 * ce + 5 * bce + 5 * dice, 1e-6);
  EXPECT_NEAR(parts.class_ce.item(), ce, 1e-12);
  EXPECT_NEAR(parts.mask_bce.item(), bce, 1e-12);
  EXPECT_NEAR(parts.mask_dice.item(), dice, 1e-12);
}

TEST(MaskLossTest, PerfectPredictionIsZero) {
  // Query 0 matches class 2 exactly; query 1 is confidently no-object.
  PredictionSet<double> p;
  p.class_logits =
      V::constant(Tensor<double>({2, 4}, {-200, 200, -200, -200,  //
                                          -200, -200, -200, 200}));
  p.mask_logits = V::constant(
      Tensor<double>({2, 4}, {200, -200, -200, 200, 0, 0, 0, 0}));
  p.logit_height = p.logit_width = 2;
  std::vector<Segment> segs(1);
  segs[0].class_id = 2;
  segs[0].mask = {1, 0, 0, 1};
  LossWeights w;
  w.dice_eps = 1e-12;
  MatchResult m;
  m.assignment = {0};
  EXPECT_NEAR(mask_branch_loss(p, segs, {}, m, w).item(), 0.0, 1e-9);
}

TEST(MaskLossTest, NonnegativeAndInvariantUnderQueryPermutation) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    auto p = make_pred(5, 6, 4, rng);
    const auto segs = gt_to_segments(testing::random_label_map(4, 4, 4, rng));
    const LossWeights w;
    const auto match = hungarian_match(match_cost(p, segs, {}, w));
    const double loss = mask_branch_loss(p, segs, {}, match, w).item();
    EXPECT_GE(loss, 0.0);

    // Reverse query order and remap the matching accordingly.
    auto reverse_rows = [](const V& x) {
      Tensor<double> t(x.shape());
      for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) {
          t.at(r, c) = x.value().at(x.rows() - 1 - r, c);
        }
      }
      return V::constant(std::move(t));
    };
    PredictionSet<double> q = p;
    q.class_logits = reverse_rows(p.class_logits);
    q.mask_logits = reverse_rows(p.mask_logits);
    MatchResult qm = match;
    for (auto& k : qm.assignment) k = 4 - k;
    EXPECT_NEAR(mask_branch_loss(q, segs, {}, qm, w).item(), loss, 1e-12);
  }
}

TEST(MaskLossTest, RejectsInconsistentMatching) {
  Rng rng(3);
  auto p = make_pred(3, 3, 2, rng);
  std::vector<Segment> segs(2);
  for (auto& s : segs) {
    s.class_id = 1;
    s.mask = {1, 0, 0, 1};
  }
  MatchResult m;
  m.assignment = {1, 1};
  EXPECT_THROW(mask_branch_loss(p, segs, {}, m, LossWeights{}),
               std::invalid_argument);
  m.assignment = {0};
  EXPECT_THROW(mask_branch_loss(p, segs, {}, m, LossWeights{}),
               std::invalid_argument);
}

TEST(BoundaryLossTest, ClosedFormAtZeroLogits) {
  V logits = V::constant(Tensor<double>(Shape{3, 4}));
  const std::vector<std::uint8_t> gt = {1, 1, 0, 0};
  EXPECT_NEAR(boundary_loss(logits, gt, {}).item(), std::log(2.0), 1e-12);
}

TEST(BoundaryLossTest, SaturationGoesToZero) {
  const std::vector<std::uint8_t> gt = {1, 0, 0, 1};
  V logits = V::constant(Tensor<double>({2, 4}, {50, -50, -50, -50,  //
                                                 -50, -50, -50, 50}));
  EXPECT_LT(boundary_loss(logits, gt, {}).item(), 1e-20);
}

TEST(BoundaryLossTest, InvariantUnderPlanePermutation) {
  Rng rng(4);
  V logits = testing::random_parameter({3, 9}, rng, -3, 3);
  std::vector<std::uint8_t> gt(9);
  for (auto& g : gt) g = rng.bernoulli(0.4);
  Tensor<double> t(Shape{3, 9});
  const std::size_t order[3] = {2, 0, 1};
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < 9; ++i) t.at(k, i) = logits.value().at(order[k], i);
  }
  EXPECT_EQ(boundary_loss(logits, gt, {}).item(),
            boundary_loss(V::constant(t), gt, {}).item());
}

TEST(TotalLossTest, WeightedSum) {
  EXPECT_EQ(total_loss(1.0, 0.01, 200.0), 3.0);
  EXPECT_EQ(total_loss(1.7, 0.4, 0.0), 1.7);
  EXPECT_THROW(total_loss(1.0, 1.0, -1.0), std::invalid_argument);
  V lm = V::constant(Tensor<double>({1}, {1.0}));
  V lb = V::constant(Tensor<double>({1}, {0.01}));
  EXPECT_EQ(total_loss(lm, lb, 200.0).item(), 3.0);
}

TEST(ComputeLossTest, TotalIsMaskPlusOmegaBoundary) {
  Rng rng(5);
  for (double omega : {0.0, 1.0, 10.0, 100.0, 200.0}) {
    auto p = make_pred(4, 14, 4, rng);
    p.boundary_logits = testing::random_parameter({4, 16}, rng);
    LabelMap mask(16, 16);
    for (int y = 4; y < 12; ++y) {
      for (int x = 2; x < 9; ++x) mask.at(y, x) = 5;
    }
    LossWeights w;
    w.boundary_weight = omega;
    const auto out = compute_loss(p, prepare_targets(mask, 4), w);
    EXPECT_EQ(out.total.item(),
              out.mask_loss.item() + omega * out.boundary_loss.item());
  }
}

TEST(ComputeLossTest, FullResolutionTargetsResizeLogits) {
  Rng rng(6);
  auto p = make_pred(3, 14, 4, rng);
  p.boundary_logits = testing::random_parameter({3, 16}, rng);
  LabelMap mask(16, 16);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 7; ++x) mask.at(y, x) = 2;
  }
  const auto targets = prepare_targets(mask, 16, 4);
  EXPECT_EQ(targets.segments[0].mask.size(), 256u);
  EXPECT_EQ(targets.boundary.size(), 16u);
  const auto out = compute_loss(p, targets, LossWeights{});
  EXPECT_TRUE(std::isfinite(out.total.item()));
  LossTargets bad = targets;
  bad.height = bad.width = 5;
  EXPECT_THROW(compute_loss(p, bad, LossWeights{}), ShapeError);
}

TEST(ComputeLossTest, IgnorePixelsExcluded) {
  // Changing logits only where the label is ignore leaves the loss fixed.
  Rng rng(7);
  auto p = make_pred(2, 14, 2, rng);
  p.boundary_logits = testing::random_parameter({2, 4}, rng);
  LabelMap mask(2, 2);
  mask.at(0, 0) = 1;
  mask.at(1, 1) = kIgnoreLabel;
  const auto targets = prepare_targets(mask, 2);
  const double a = compute_loss(p, targets, LossWeights{}).total.item();
  for (std::size_t k = 0; k < 2; ++k) {
    p.mask_logits.mutable_data()[k * 4 + 3] += 3.0;
    p.boundary_logits.mutable_data()[k * 4 + 3] -= 2.0;
  }
  EXPECT_EQ(compute_loss(p, targets, LossWeights{}).total.item(), a);
}

TEST(PrepareTargetsTest, BandAtFullResolutionThenDownsampled) {
  LabelMap mask(8, 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 4; ++x) mask.at(y, x) = 3;
  }
  const auto t = prepare_targets(mask, 8);
  const auto band = boundary_from_mask(mask, boundary_thickness(8, 8));
  EXPECT_EQ(t.boundary, band.values);
  ASSERT_EQ(t.segments.size(), 1u);
  EXPECT_EQ(t.segments[0].class_id, 3);
}

}  // namespace
}  // namespace liquidseg
