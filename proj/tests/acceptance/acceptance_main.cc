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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "grad_cases.h"
#include "oracles.h"
#include "liquidseg/boundary.h"
#include "liquidseg/dataset.h"
#include "liquidseg/hungarian.h"
#include "liquidseg/inference.h"
#include "liquidseg/loss.h"
#include "liquidseg/metrics.h"
#include "liquidseg/run_config.h"
#include "liquidseg/synth.h"
#include "liquidseg/trainer.h"
#include "liquidseg_tools/commands.h"

namespace liquidseg {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "liquidseg_acceptance" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RunConfig load_config(const std::string& file) {
  return RunConfig::from_config(
      KeyValueConfig::load(fs::path(LIQUIDSEG_SOURCE_DIR) / "configs" / file));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "liquidseg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = tools::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::fprintf(stderr, "liquidseg %s: %s", args[1].c_str(), err.str().c_str());
  return code;
}

Verdict gradient_suite() {
  const auto t0 = Clock::now();
  double worst = 0;
  std::string worst_case;
  int checks = 0;
  auto run_all = [&](const std::vector<testing::GradCase>& cases) {
    for (const auto& c : cases) {
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto r = c.run(seed);
        ++checks;
        if (!(r.max_relative_error <= worst)) {
          worst = r.max_relative_error;
          worst_case = c.name + " seed " + std::to_string(seed);
        }
      }
    }
  };
  run_all(testing::op_grad_cases());
  run_all(testing::model_grad_cases());
  const double secs = seconds_since(t0);
  return {worst <= 1e-3 && secs < 300.0,
          std::to_string(checks) + " checks, worst " + fmt("%.2e", worst) + " (" +
              worst_case + "), " + fmt("%.1fs", secs)};
}

Verdict matching_oracle() {
  const auto t0 = Clock::now();
  int exact = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(mix_seed(seed, 0xacce));
    const std::size_t rows = 1 + rng.below(6);
    const std::size_t cols = rows + rng.below(9 - rows);
    CostMatrix c(rows, cols);
    // Multiples of 1/64 keep every sum exact in double.
    for (auto& v : c.values) v = static_cast<double>(rng.below(1024)) / 64.0 - 8.0;
    const auto r = hungarian_match(c);
    if (testing::is_injective(r.assignment, cols) &&
        r.total_cost == testing::brute_force_assignment_cost(c) &&
        testing::assignment_cost(c, r.assignment) == r.total_cost) {
      ++exact;
    }
  }
  const double secs = seconds_since(t0);
  return {exact == 200 && secs < 10.0,
          std::to_string(exact) + "/200 exact, " + fmt("%.2fs", secs)};
}

Verdict boundary_oracle() {
  int exact = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(mix_seed(seed, 0xb0));
    const LabelMap m = seed % 2 ? testing::random_blocky_map(16, 16, 4, 5, rng)
                                : testing::random_label_map(16, 16, 3, rng);
    bool all = true;
    for (int t : {1, 3, 5, 7}) {
      all = all && boundary_from_mask(m, t).values == testing::brute_force_band(m, t);
    }
    exact += all;
  }
  const int t512 = boundary_thickness(512, 512);
  return {exact == 100 && t512 == 7, std::to_string(exact) +
                                         "/100 masks exact for t in {1,3,5,7}; "
                                         "thickness(512,512) = " +
                                         std::to_string(t512)};
}

Verdict metric_oracle() {
  int exact = 0;
  double worst_f1 = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(mix_seed(seed, 0x3e));
    const LabelMap p = testing::random_blocky_map(20, 24, 15, 6, rng);
    LabelMap g = testing::random_blocky_map(20, 24, 15, 6, rng);
    for (auto& v : g.labels) {
      if (rng.bernoulli(0.03)) v = kIgnoreLabel;
    }
    ConfusionAccumulator acc;
    acc.accumulate(p, g);
    const auto oracle = testing::brute_force_counts({p}, {g}, kNumLiquidClasses);
    const MetricReport rep = per_class_report(acc);
    bool ok = true;
    for (const auto& c : rep.classes) {
      const auto tp = oracle.tp[c.label], fp = oracle.fp[c.label], fn = oracle.fn[c.label];
      ok = ok && c.tp == tp && c.fp == fp && c.fn == fn;
      if (tp + fp + fn == 0) {
        ok = ok && !c.iou;
        continue;
      }
      // Correctly rounded quotients of the exact integer counts.
      ok = ok && c.iou && *c.iou == double(tp) / double(tp + fp + fn);
      ok = ok && c.f1 && *c.f1 == double(2 * tp) / double(2 * tp + fp + fn);
      if (tp + fn) ok = ok && c.pa && *c.pa == double(tp) / double(tp + fn);
      if (tp + fp) ok = ok && c.precision && *c.precision == double(tp) / double(tp + fp);
      worst_f1 = std::max(worst_f1, std::abs(*c.f1 - 2 * *c.iou / (1 + *c.iou)));
    }
    exact += ok;
  }
  return {exact == 50 && worst_f1 <= 1e-12,
          std::to_string(exact) + "/50 pairs exact; max |F1 - 2IoU/(1+IoU)| = " +
              fmt("%.1e", worst_f1)};
}

Verdict overfit_run() {
  const RunConfig cfg = load_config("toy_overfit.cfg");
  InMemorySource scenes;
  for (int i = 0; i < 10; ++i) {
    const SyntheticItem it = synth_item(GeneratorConfig{}, 3, i);
    scenes.add(it.id, Sample{it.scene.image, it.scene.mask}, it.easy ? "easy" : "hard");
  }
  SegmentationModel<float> model(cfg.model, cfg.seed);
  TrainerOptions opt;
  opt.settings = cfg.train;
  opt.augment = cfg.augment;
  opt.loss = cfg.loss;
  opt.seed = cfg.seed;
  std::vector<double> losses;
  long long first_hit = -1;
  opt.on_step = [&](const StepRecord& r) { losses.push_back(r.total); };
  opt.on_eval = [&](const EvalRecord& e) {
    if (first_hit < 0 && e.mean_iou.value_or(0) >= 0.90) first_hit = e.step;
  };
  const auto t0 = Clock::now();
  const TrainOutcome out = train_model(model, scenes, &scenes, opt);
  const double secs = seconds_since(t0);
  double head = 0, tail = 0;
  for (int i = 0; i < 10; ++i) {
    head += losses[i] / 10;
    tail += losses[190 + i] / 10;
  }
  const double best = out.best_mean_iou.value_or(0);
  const bool pass = cfg.loss.boundary_weight == 200.0 && cfg.train.max_steps == 2000 &&
                    best >= 0.90 && tail <= 0.5 * head && secs < 1800.0;
  return {pass, "best mIoU " + fmt("%.4f", best) + " (first >= 0.90 at step " +
                    std::to_string(first_hit) + "), loss steps 0-9 " + fmt("%.3f", head) +
                    " -> 190-199 " + fmt("%.3f", tail) + ", " + fmt("%.0fs", secs)};
}

Verdict ablation_direction() {
  const char* files[3] = {"ablation_bl.cfg", "ablation_bb.cfg", "ablation_bb_bca.cfg"};
  GeneratorConfig gen;
  gen.classes = {1, 2, 3, 9};
  gen.min_opacity = 0.6;
  gen.max_blobs = 2;
  InMemorySource train, test;
  for (int i = 0; i < 200; ++i) {
    const SyntheticItem it = synth_item(gen, 100, i);
    train.add(it.id, Sample{it.scene.image, it.scene.mask});
  }
  for (int i = 0; i < 50; ++i) {
    const SyntheticItem it = synth_item(gen, 200, i);
    test.add(it.id, Sample{it.scene.image, it.scene.mask});
  }
  int ordered = 0;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    double miou[3];
    for (int k = 0; k < 3; ++k) {
      const RunConfig cfg = load_config(files[k]);
      SegmentationModel<float> model(cfg.model, seed);
      TrainerOptions opt;
      opt.settings = cfg.train;
      opt.augment = cfg.augment;
      opt.loss = cfg.loss;
      opt.seed = seed;
      const TrainOutcome out = train_model(model, train, &test, opt);
      miou[k] = out.evals.back().mean_iou.value_or(0);
    }
    const bool ok = miou[0] <= miou[1] && miou[1] <= miou[2];
    ordered += ok;
    detail += (seed ? "; " : "") + std::string("s") + std::to_string(seed) + " " +
              fmt("%.3f", miou[0]) + "/" + fmt("%.3f", miou[1]) + "/" + fmt("%.3f", miou[2]) +
              (ok ? "" : "x");
    std::fprintf(stderr, "ablation seed %d: %s\n", static_cast<int>(seed), detail.c_str());
  }
  return {ordered >= 3, std::to_string(ordered) + "/5 seeds ordered BL<=BB<=BB+BCA (" +
                            detail + ")"};
}

Verdict loss_arithmetic() {
  const double total = total_loss(1.0, 0.01, 200.0);
  const fs::path data = scratch("omega_data");
  bool launched = cli({"synth", "--n", "4", "--seed", "1", "--out", data.string(),
                       "synth.height=32", "synth.width=32"}) == 0;
  std::string seen;
  for (double omega : {1.0, 10.0, 100.0, 200.0}) {
    const std::string name = "omega_" + std::to_string(static_cast<int>(omega)) + ".cfg";
    const RunConfig cfg = load_config(name);
    launched = launched && cfg.loss.boundary_weight == omega;
    const fs::path out = scratch(name);
    launched = launched &&
               cli({"train", "--config",
                    (fs::path(LIQUIDSEG_SOURCE_DIR) / "configs" / name).string(), "--data",
                    data.string(), "--out", out.string(), "train.max_steps=1",
                    "train.batch_size=1", "model.input_size=32", "model.patch_size=8",
                    "model.width=16", "model.backbone_depth=1", "model.joint_depth=1",
                    "model.num_queries=2", "model.num_heads=2"}) == 0;
    const RunConfig resolved =
        RunConfig::from_config(KeyValueConfig::load(out / "resolved_config.cfg"));
    launched = launched && resolved.loss.boundary_weight == omega;
    seen += (seen.empty() ? "" : ",") + format_double(resolved.loss.boundary_weight);
  }
  return {total == 3.0 && launched, "total_loss(1, 0.01, 200) = " + format_double(total) +
                                        "; omega sweep {" + seen + "} " +
                                        (launched ? "launched" : "failed to launch")};
}

Verdict sliding_window() {
  ModelConfig m;
  m.input_size = 32;
  m.patch_size = 8;
  m.width = 16;
  m.backbone_depth = 1;
  m.joint_depth = 1;
  m.num_queries = 4;
  m.num_heads = 2;
  m.dropout = 0;
  SegmentationModel<float> model(m, 11);
  for (auto& b : model.class_head.bias.mutable_data()) b = -2.0f;
  model.class_head.bias.mutable_data()[2] = 4.0f;
  const WindowScorer scorer = model_scorer(model);
  int identical = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    Image img(32, 32);
    for (auto& v : img.pixels) v = static_cast<float>(rng.uniform());
    ScoreMap canvas;
    const LabelMap sliding = sliding_infer(img, scorer, 32, 0.5, &canvas);
    const ScoreMap single = scorer(img);
    identical += canvas.values == single.values && sliding == labels_from_scores(single);
  }
  const TilePlan plan = plan_tiles(512, 768, 512);
  const bool offsets = plan.offsets == std::vector<int>{0, 256};
  std::string off;
  for (int o : plan.offsets) off += (off.empty() ? "" : ",") + std::to_string(o);
  return {identical == 10 && offsets,
          std::to_string(identical) + "/10 square inputs identical; 512x768 offsets {" + off +
              "}"};
}

Verdict split_protocol() {
  // 5000 single-class records with a skewed class distribution, on disk.
  const std::vector<std::pair<int, int>> counts = {
      {1, 1203}, {2, 402}, {3, 377}, {4, 351}, {5, 420}, {6, 389}, {7, 298},
      {8, 187},  {9, 211}, {10, 176}, {11, 233}, {12, 305}, {13, 121}, {14, 327}};
  const fs::path root = scratch("split5000");
  fs::create_directories(root / "images");
  fs::create_directories(root / "masks");
  std::vector<DatasetRecord> records;
  const Image img(4, 4);
  int n = 0;
  for (const auto& [cls, count] : counts) {
    LabelMap mask(4, 4);
    for (int i = 0; i < 6; ++i) mask.labels[i] = static_cast<std::uint8_t>(cls);
    for (int i = 0; i < count; ++i, ++n) {
      char id[16];
      std::snprintf(id, sizeof(id), "r%05d", n);
      DatasetRecord r;
      r.id = id;
      r.image_path = root / "images" / (r.id + ".png");
      r.mask_path = root / "masks" / (r.id + ".png");
      write_image(r.image_path, img);
      write_label_map(r.mask_path, mask);
      r.class_set = {static_cast<std::uint8_t>(cls)};
      r.primary_class = cls;
      records.push_back(r);
    }
  }
  write_manifest(root, records);
  if (cli({"split", "--data", root.string(), "--ratio", "0.84", "--out",
           (root / "summary").string()}) != 0) {
    return {false, "split command failed"};
  }
  std::map<int, int> train;
  int n_train = 0, n_test = 0;
  for (const auto& r : load_manifest(root)) {
    if (r.split == "train") {
      ++n_train;
      ++train[r.primary_class];
    } else if (r.split == "test") {
      ++n_test;
    }
  }
  double worst = 0;
  for (const auto& [cls, count] : counts) worst = std::max(worst, std::abs(train[cls] - 0.84 * count));
  return {n_train == 4200 && n_test == 800 && worst <= 1.0,
          std::to_string(n_train) + "/" + std::to_string(n_test) +
              ", max per-class deviation " + fmt("%.2f", worst) + " records"};
}

Verdict determinism() {
  const fs::path base = scratch("determinism");
  auto csvs = [](const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
      const auto ext = e.path().extension();
      if (e.is_regular_file() && (ext == ".csv" || ext == ".pgm" || ext == ".png")) {
        files[fs::relative(e.path(), dir).string()] = slurp(e.path());
      }
    }
    return files;
  };
  const std::vector<std::string> model = {
      "model.input_size=32", "model.patch_size=8", "model.width=16",
      "model.backbone_depth=1", "model.joint_depth=1", "model.num_queries=3",
      "model.num_heads=2", "train.max_steps=6", "train.batch_size=2", "seed=5"};
  auto with = [&](std::vector<std::string> a) {
    a.insert(a.end(), model.begin(), model.end());
    return a;
  };
  auto pipeline = [&](const fs::path& root) {
    const std::string data = (root / "data").string();
    bool ok = cli({"synth", "--n", "12", "--seed", "7", "--out", data, "synth.height=32",
                   "synth.width=32"}) == 0;
    ok = ok && cli({"split", "--data", data, "--out", (root / "split").string()}) == 0;
    ok = ok && cli({"stats", "--data", data, "--out", (root / "stats").string()}) == 0;
    ok = ok && cli(with({"train", "--data", data, "--out", (root / "train").string()})) == 0;
    ok = ok && cli(with({"eval", "--data", data, "--checkpoint",
                         (root / "train" / "last.ckpt").string(), "--out",
                         (root / "eval").string(), "eval.easy_hard=true"})) == 0;
    return ok;
  };
  const bool ran = pipeline(base / "a") && pipeline(base / "b");
  const auto a = csvs(base / "a"), b = csvs(base / "b");
  bool same_paths = a.size() == b.size();
  int identical = 0;
  for (const auto& [k, v] : a) {
    const auto it = b.find(k);
    if (it == b.end()) {
      same_paths = false;
    } else {
      identical += it->second == v;
    }
  }
  // Rerun training from its own resolved config.
  const fs::path replay = base / "replay";
  const bool replayed = cli({"train", "--config",
                             (base / "a" / "train" / "resolved_config.cfg").string(), "--out",
                             replay.string()}) == 0;
  auto first_row = [](const std::string& csv) {
    const auto a = csv.find('\n') + 1;
    return csv.substr(a, csv.find('\n', a) - a);
  };
  const std::string log_a = slurp(base / "a" / "train" / "loss_log.csv");
  const bool step0 = replayed && first_row(log_a) == first_row(slurp(base / "b" / "train" /
                                                                     "loss_log.csv")) &&
                     slurp(replay / "loss_log.csv") == log_a;
  const bool pass = ran && same_paths && identical == static_cast<int>(a.size()) &&
                    !a.empty() && step0;
  return {pass, std::to_string(identical) + "/" + std::to_string(a.size()) +
                    " emitted CSV/image files identical across reruns; step-0 loss row " +
                    (step0 ? "identical" : "differs") + ", resolved-config replay " +
                    (replayed ? "ran" : "failed")};
}

}  // namespace
}  // namespace liquidseg

int main(int argc, char** argv) {
  using namespace liquidseg;
  struct Criterion {
    const char* id;
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria = {
      {"C1", "gradient suite", gradient_suite},
      {"C2", "matching oracle", matching_oracle},
      {"C3", "boundary oracle", boundary_oracle},
      {"C4", "metric oracle", metric_oracle},
      {"C5", "overfit run", overfit_run},
      {"C6", "ablation direction", ablation_direction},
      {"C7", "loss arithmetic and omega sweep", loss_arithmetic},
      {"C8", "sliding-window consistency", sliding_window},
      {"C9", "split protocol", split_protocol},
      {"C10", "determinism", determinism},
  };
  // Optional filter: acceptance C2 C8 ...
  std::vector<std::string> only(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %s %s: %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
