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

#include "liquidseg/trainer.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "liquidseg/checkpoint.h"
#include "liquidseg/inference.h"
#include "liquidseg/optimizer.h"
#include "liquidseg/rng.h"

namespace liquidseg {
namespace {

constexpr std::uint64_t kOrderStream = 0x04de4ULL;
constexpr std::uint64_t kDropoutStream = 0xd409ULL;

std::uint64_t sample_seed(std::uint64_t seed, const std::string& id, int epoch) {
  return mix_seed(mix_seed(seed, hash_string(id)), static_cast<std::uint64_t>(epoch));
}

Sample prepare_sample(const SampleSource& src, std::size_t i, int epoch,
                      const TrainerOptions& opt, int input_size) {
  Sample raw = src.get(i);
  if (!opt.settings.augment) return fit_square(raw.image, raw.mask, input_size);
  AugmentConfig aug = opt.augment;
  aug.crop_size = input_size;
  return augment(raw.image, raw.mask, aug, sample_seed(opt.seed, src.id(i), epoch));
}

bool all_finite(const Var<float>& v) {
  if (!v.defined()) return true;
  for (float x : v.data()) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

bool finite_outputs(const PredictionSet<float>& p) {
  return all_finite(p.class_logits) && all_finite(p.mask_logits) &&
         all_finite(p.boundary_logits);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : ""; }

void save_checkpoint(const SegmentationModel<float>& model,
                     const std::filesystem::path& path) {
  write_checkpoint(path, snapshot_parameters(model.parameters()));
  write_model_manifest(path, model.config());
}

}  // namespace

void InMemorySource::add(std::string id, Sample sample, std::string difficulty) {
  ids_.push_back(std::move(id));
  samples_.push_back(std::move(sample));
  difficulty_.push_back(std::move(difficulty));
}

Sample DiskSource::get(std::size_t i) const {
  return {read_image(records_[i].image_path), read_label_map(records_[i].mask_path)};
}

double initial_loss(const SegmentationModel<float>& model,
                    const SampleSource& train, const TrainerOptions& options) {
  if (train.size() == 0) throw std::invalid_argument("training set is empty");
  const int S = static_cast<int>(model.config().input_size);
  const Sample s = prepare_sample(train, 0, 0, options, S);
  Rng rng(mix_seed(mix_seed(options.seed, kDropoutStream), 0));
  const nn::ForwardContext ctx{true, &rng};
  const auto pred = model.forward(s.image, ctx);
  const int logit = static_cast<int>(model.config().logit_size());
  const auto targets = prepare_targets(
      s.mask, options.settings.full_resolution_targets ? S : logit, logit);
  return static_cast<double>(compute_loss(pred, targets, options.loss).total.item());
}

TrainOutcome train_model(SegmentationModel<float>& model,
                         const SampleSource& train, const SampleSource* holdout,
                         const TrainerOptions& options) {
  namespace fs = std::filesystem;
  if (train.size() == 0) throw std::invalid_argument("training set is empty");
  const auto& st = options.settings;
  if (st.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (st.max_steps < 0) throw std::invalid_argument("max_steps must be >= 0");
  if (st.max_steps == 0 && st.epochs < 1) {
    throw std::invalid_argument("epochs must be >= 1");
  }
  const int S = static_cast<int>(model.config().input_size);
  const int logit = static_cast<int>(model.config().logit_size());
  const int target_size = st.full_resolution_targets ? S : logit;
  const std::size_t B = static_cast<std::size_t>(st.batch_size);
  const long long steps_per_epoch =
      static_cast<long long>((train.size() + B - 1) / B);
  const long long total_steps =
      st.max_steps > 0 ? st.max_steps : steps_per_epoch * st.epochs;

  const bool write = !options.output_dir.empty();
  std::ofstream loss_log, eval_log;
  if (write) {
    fs::create_directories(options.output_dir);
    loss_log.open(options.output_dir / "loss_log.csv", std::ios::trunc);
    eval_log.open(options.output_dir / "eval_log.csv", std::ios::trunc);
    if (!loss_log || !eval_log) {
      throw std::runtime_error("cannot write logs in " + options.output_dir.string());
    }
    loss_log << "step,epoch,total,mask_loss,boundary_loss,class_ce,mask_bce,"
                "mask_dice,grad_norm\n";
    eval_log << "epoch,step,mean_iou,mean_pa\n";
  }

  AdamW<float> opt(model.parameters(), st.optimizer);
  TrainOutcome outcome;
  std::vector<std::size_t> order(train.size());

  auto run_eval = [&](int epoch, long long step) {
    if (holdout == nullptr || holdout->size() == 0) return;
    const EvalResult r = evaluate_model(model, *holdout);
    const MetricReport rep = per_class_report(r.all);
    EvalRecord rec{epoch, step, rep.mean_iou, rep.mean_pa};
    outcome.evals.push_back(rec);
    if (write) {
      eval_log << epoch << ',' << step << ',' << fmt_opt(rec.mean_iou) << ','
               << fmt_opt(rec.mean_pa) << '\n';
      eval_log.flush();
    }
    const double miou = rec.mean_iou.value_or(0.0);
    if (!outcome.best_mean_iou || miou > *outcome.best_mean_iou) {
      outcome.best_mean_iou = miou;
      if (write) save_checkpoint(model, options.output_dir / "best.ckpt");
    }
    if (options.on_eval) options.on_eval(rec);
  };

  auto fail_nonfinite = [&](std::string msg, const std::string& batch_ids) {
    if (write) {
      save_checkpoint(model, options.output_dir / "nonfinite_snapshot.ckpt");
      std::ofstream diag(options.output_dir / "nonfinite.txt", std::ios::trunc);
      diag << msg << "\nbatch: " << batch_ids << '\n';
      msg += "; snapshot written to " +
             (options.output_dir / "nonfinite_snapshot.ckpt").string();
    }
    throw NonFiniteLossError(msg);
  };

  long long step = 0;
  for (int epoch = 0; step < total_steps; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng order_rng(mix_seed(mix_seed(options.seed, kOrderStream),
                           static_cast<std::uint64_t>(epoch)));
    order_rng.shuffle(order.begin(), order.end());
    for (std::size_t start = 0; start < order.size() && step < total_steps;
         start += B, ++step) {
      const std::size_t end = std::min(order.size(), start + B);
      const float inv = 1.0f / static_cast<float>(end - start);
      StepRecord rec;
      rec.step = step;
      rec.epoch = epoch;
      std::string batch_ids;
      for (std::size_t j = start; j < end; ++j) {
        const std::size_t idx = order[j];
        const Sample s = prepare_sample(train, idx, epoch, options, S);
        Rng rng(mix_seed(mix_seed(options.seed, kDropoutStream),
                         static_cast<std::uint64_t>(step) * 4096 + (j - start)));
        const nn::ForwardContext ctx{true, &rng};
        const auto pred = model.forward(s.image, ctx);
        if (!batch_ids.empty()) batch_ids += ' ';
        batch_ids += train.id(idx);
        if (!finite_outputs(pred)) {
          fail_nonfinite("non-finite model output at step " + std::to_string(step) +
                             " (sample " + train.id(idx) + ")",
                         batch_ids);
        }
        const auto targets = prepare_targets(s.mask, target_size, logit);
        const auto loss = compute_loss(pred, targets, options.loss);
        const double total = loss.total.item();
        rec.total += total * inv;
        rec.mask_loss += loss.mask_loss.item() * inv;
        rec.boundary_loss += loss.boundary_loss.item() * inv;
        rec.class_ce += loss.class_ce.item() * inv;
        rec.mask_bce += loss.mask_bce.item() * inv;
        rec.mask_dice += loss.mask_dice.item() * inv;
        if (!std::isfinite(total)) {
          fail_nonfinite("non-finite loss at step " + std::to_string(step) +
                             " (sample " + train.id(idx) + "): total=" + fmt(total) +
                             " mask=" + fmt(loss.mask_loss.item()) +
                             " boundary=" + fmt(loss.boundary_loss.item()),
                         batch_ids);
        }
        backward(ops::scale(loss.total, inv));
      }
      if (st.schedule == LrSchedule::kCosine) {
        opt.set_rate_scale(0.5 * (1.0 + std::cos(3.141592653589793 * step /
                                                 static_cast<double>(total_steps))));
      }
      rec.grad_norm = opt.step();
      outcome.steps.push_back(rec);
      if (write) {
        loss_log << rec.step << ',' << rec.epoch << ',' << fmt(rec.total) << ','
                 << fmt(rec.mask_loss) << ',' << fmt(rec.boundary_loss) << ','
                 << fmt(rec.class_ce) << ',' << fmt(rec.mask_bce) << ','
                 << fmt(rec.mask_dice) << ',' << fmt(rec.grad_norm) << '\n';
      }
      if (options.on_step) options.on_step(rec);
    }
    const bool epoch_done = step % steps_per_epoch == 0;
    if ((st.eval_each_epoch && epoch_done) || step >= total_steps) {
      run_eval(epoch, step);
    }
  }
  if (write) {
    loss_log.flush();
    save_checkpoint(model, options.output_dir / "last.ckpt");
    if (!outcome.best_mean_iou) save_checkpoint(model, options.output_dir / "best.ckpt");
  }
  return outcome;
}

EvalResult evaluate_model(const SegmentationModel<float>& model,
                          const SampleSource& source, bool keep_predictions) {
  const int C = static_cast<int>(model.config().num_classes);
  EvalResult r{ConfusionAccumulator(C), ConfusionAccumulator(C),
               ConfusionAccumulator(C), {}};
  const WindowScorer scorer = model_scorer(model);
  const int S = static_cast<int>(model.config().input_size);
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Sample s = source.get(i);
    const LabelMap pred = sliding_infer(s.image, scorer, S);
    r.all.accumulate(pred, s.mask);
    const std::string d = source.difficulty(i);
    if (d == "easy") r.easy.accumulate(pred, s.mask);
    if (d == "hard") r.hard.accumulate(pred, s.mask);
    if (keep_predictions) r.predictions.push_back(pred);
  }
  return r;
}

}  // namespace liquidseg
