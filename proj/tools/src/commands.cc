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

#include "liquidseg_tools/commands.h"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "liquidseg/checkpoint.h"
#include "liquidseg/dataset.h"
#include "liquidseg/inference.h"
#include "liquidseg/metrics.h"
#include "liquidseg/stats.h"
#include "liquidseg/synth.h"
#include "liquidseg/trainer.h"

namespace liquidseg::tools {
namespace fs = std::filesystem;

namespace {

// Raised for bad inputs that are not configuration syntax errors.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_dir(const fs::path& p, const std::string& key) {
  if (p.empty()) throw ValidationError(key + " is not set");
  if (!fs::is_directory(p)) throw ValidationError(key + ": no such directory " + p.string());
}

void require_file(const fs::path& p, const std::string& key) {
  if (p.empty()) throw ValidationError(key + " is not set");
  if (!fs::exists(p)) throw ValidationError(key + ": no such file " + p.string());
}

fs::path prepare_output(const RunConfig& cfg, const CommandContext& ctx) {
  const fs::path dir = resolve_output_dir(cfg, ctx.output_root);
  fs::create_directories(dir);
  std::ofstream out(dir / "resolved_config.cfg", std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + (dir / "resolved_config.cfg").string());
  out << cfg.to_config().dump();
  return dir;
}

std::vector<DatasetRecord> records_in_split(const std::vector<DatasetRecord>& all,
                                            const std::string& split) {
  std::vector<DatasetRecord> out;
  std::copy_if(all.begin(), all.end(), std::back_inserter(out),
               [&](const DatasetRecord& r) { return r.split == split; });
  return out;
}

SegmentationModel<float> load_model(const RunConfig& cfg) {
  require_file(cfg.checkpoint, "checkpoint");
  check_model_manifest(cfg.checkpoint, cfg.model);
  SegmentationModel<float> model(cfg.model, cfg.seed);
  restore_parameters(model.parameters(), read_checkpoint(cfg.checkpoint));
  return model;
}

void write_csv(const fs::path& path, const MetricReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_report_csv(out, report);
}

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp";
}

std::string command_help(const std::string& name) {
  static const std::map<std::string, std::string> help = {
      {"train", "train a model; writes logs, checkpoints and resolved config"},
      {"eval", "sliding-window evaluation of a checkpoint on a split"},
      {"infer", "predict label masks for an image or a directory"},
      {"split", "stratified train/test split; rewrites manifest.csv"},
      {"stats", "class, pixel, location and area statistics"},
      {"synth", "generate a synthetic dataset"},
  };
  return help.at(name);
}

}  // namespace

int cmd_train(const RunConfig& cfg, const CommandContext& ctx) {
  require_dir(cfg.data_root, "data.root");
  const auto records = load_manifest(cfg.data_root);
  const auto train = records_in_split(records, "train");
  const auto holdout = records_in_split(records, cfg.eval_split);
  if (train.empty()) throw ValidationError("no records with split=train in " + cfg.data_root.string());
  const fs::path dir = prepare_output(cfg, ctx);

  SegmentationModel<float> model(cfg.model, cfg.seed);
  TrainerOptions opt;
  opt.settings = cfg.train;
  opt.augment = cfg.augment;
  opt.loss = cfg.loss;
  opt.seed = cfg.seed;
  opt.output_dir = dir;
  opt.on_eval = [&](const EvalRecord& e) {
    *ctx.out << "epoch " << e.epoch << " step " << e.step << " mIoU "
             << (e.mean_iou ? std::to_string(*e.mean_iou) : "n/a") << '\n';
  };
  const DiskSource train_src(train);
  const DiskSource holdout_src(holdout);
  if (holdout.empty()) {
    *ctx.err << "warning: no '" << cfg.eval_split << "' records; skipping holdout eval\n";
  }
  const TrainOutcome r = train_model(model, train_src,
                                     holdout.empty() ? nullptr : &holdout_src, opt);
  *ctx.out << "trained " << r.steps.size() << " steps; step-0 loss "
           << r.steps.front().total << "; final loss " << r.steps.back().total
           << '\n'
           << "checkpoints in " << dir.string() << '\n';
  return kExitOk;
}

int cmd_eval(const RunConfig& cfg, const CommandContext& ctx) {
  require_dir(cfg.data_root, "data.root");
  SegmentationModel<float> model = load_model(cfg);
  const auto records = records_in_split(load_manifest(cfg.data_root), cfg.eval_split);
  if (records.empty()) {
    throw ValidationError("split '" + cfg.eval_split + "' is empty in " + cfg.data_root.string());
  }
  if (cfg.easy_hard) {
    for (const auto& r : records) {
      if (r.difficulty != "easy" && r.difficulty != "hard") {
        throw ValidationError("record " + r.id + " has no easy/hard tag");
      }
    }
  }
  const fs::path dir = prepare_output(cfg, ctx);
  const EvalResult res = evaluate_model(model, DiskSource(records));
  const MetricReport report = per_class_report(res.all);
  write_csv(dir / "metrics.csv", report);
  {
    std::ofstream table(dir / "metrics.txt", std::ios::trunc);
    write_report_table(table, report);
  }
  write_report_table(*ctx.out, report);
  if (cfg.easy_hard) {
    const EasyHardReport eh = easy_hard_eval(res.easy, res.hard);
    write_csv(dir / "metrics_easy.csv", eh.easy);
    write_csv(dir / "metrics_hard.csv", eh.hard);
  }
  return kExitOk;
}

int cmd_infer(const RunConfig& cfg, const CommandContext& ctx) {
  require_file(cfg.infer_input, "infer.input");
  SegmentationModel<float> model = load_model(cfg);
  std::vector<fs::path> inputs;
  if (fs::is_directory(cfg.infer_input)) {
    for (const auto& e : fs::directory_iterator(cfg.infer_input)) {
      if (e.is_regular_file() && is_image_file(e.path())) inputs.push_back(e.path());
    }
    std::sort(inputs.begin(), inputs.end());
  } else {
    inputs.push_back(cfg.infer_input);
  }
  if (inputs.empty()) throw ValidationError("no images in " + cfg.infer_input.string());
  const fs::path dir = prepare_output(cfg, ctx);
  const WindowScorer scorer = model_scorer(model);
  for (const auto& path : inputs) {
    const Image image = read_image(path);
    const LabelMap labels =
        sliding_infer(image, scorer, static_cast<int>(cfg.model.input_size));
    const std::string stem = path.stem().string();
    write_label_map(dir / (stem + ".png"), labels);
    if (cfg.colorize) write_image(dir / (stem + "_color.png"), colorize(labels));
  }
  *ctx.out << "wrote " << inputs.size() << " mask(s) to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_split(const RunConfig& cfg, const CommandContext& ctx) {
  require_dir(cfg.data_root, "data.root");
  const auto records = load_manifest(cfg.data_root);
  if (records.empty()) throw ValidationError("manifest has no records");
  const SplitResult split = stratified_split(records, cfg.split_ratio, cfg.seed);
  for (const auto& w : split.warnings) *ctx.err << "warning: " << w << '\n';
  std::vector<DatasetRecord> all = split.train;
  all.insert(all.end(), split.test.begin(), split.test.end());
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  write_manifest(cfg.data_root, all);

  const fs::path dir = prepare_output(cfg, ctx);
  std::map<int, std::pair<int, int>> per_class;
  for (const auto& r : split.train) ++per_class[r.primary_class].first;
  for (const auto& r : split.test) ++per_class[r.primary_class].second;
  std::ofstream csv(dir / "split_summary.csv", std::ios::trunc);
  csv << "primary_class,train,test\n";
  for (const auto& [c, n] : per_class) csv << c << ',' << n.first << ',' << n.second << '\n';
  *ctx.out << "train " << split.train.size() << ", test " << split.test.size() << '\n';
  return kExitOk;
}

int cmd_stats(const RunConfig& cfg, const CommandContext& ctx) {
  require_dir(cfg.data_root, "data.root");
  const auto records = load_manifest(cfg.data_root);
  if (records.empty()) throw ValidationError("manifest has no records");
  const fs::path dir = prepare_output(cfg, ctx);
  write_dataset_stats(dir, records, cfg.stats_grid, cfg.stats_bins);
  *ctx.out << "statistics for " << records.size() << " records in " << dir.string() << '\n';
  return kExitOk;
}

int cmd_synth(const RunConfig& cfg, const CommandContext& ctx) {
  const fs::path dir = prepare_output(cfg, ctx);
  write_synthetic_dataset(dir, cfg.generator, cfg.synth_count, cfg.seed);
  *ctx.out << "wrote " << cfg.synth_count << " scenes to " << dir.string() << '\n';
  return kExitOk;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"train", "eval",  "infer",
                                                 "split", "stats", "synth"};
  return names;
}

int run_command(const std::string& name, const RunConfig& cfg,
                const CommandContext& ctx) {
  try {
    if (name == "train") return cmd_train(cfg, ctx);
    if (name == "eval") return cmd_eval(cfg, ctx);
    if (name == "infer") return cmd_infer(cfg, ctx);
    if (name == "split") return cmd_split(cfg, ctx);
    if (name == "stats") return cmd_stats(cfg, ctx);
    if (name == "synth") return cmd_synth(cfg, ctx);
    *ctx.err << "error: unknown command '" << name << "'\n";
    return kExitValidation;
  } catch (const DatasetError& e) {
    *ctx.err << "error: invalid dataset:\n" << e.what() << '\n';
    return kExitValidation;
  } catch (const ManifestMismatch& e) {
    *ctx.err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ConfigError& e) {
    *ctx.err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ValidationError& e) {
    *ctx.err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    *ctx.err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NonFiniteLossError& e) {
    *ctx.err << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    *ctx.err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Liquid segmentation: training, evaluation and dataset tools"};
  app.require_subcommand(1, 1);
  struct Options {
    std::string config;
    std::vector<std::string> sets;
    std::vector<std::string> extras;
  };
  std::map<std::string, Options> options;
  std::map<std::string, std::map<std::string, std::string>> shortcuts;
  for (const auto& name : command_names()) {
    auto* sub = app.add_subcommand(name, command_help(name));
    auto& o = options[name];
    auto& s = shortcuts[name];
    sub->add_option("--config,-c", o.config, "flat key = value config file");
    sub->add_option("--set", o.sets, "override key=value (repeatable)");
    sub->add_option("overrides", o.extras, "key=value overrides");
    auto shortcut = [&](const std::string& flag, const std::string& key,
                        const std::string& help) {
      sub->add_option_function<std::string>(
          flag, [&s, key](const std::string& v) { s[key] = v; }, help);
    };
    shortcut("--seed", "seed", "seed");
    shortcut("--out,-o", "output.dir", "output directory");
    if (name != "synth") shortcut("--data", "data.root", "dataset root");
    if (name == "synth") shortcut("--n", "synth.count", "number of scenes");
    if (name == "split") shortcut("--ratio", "split.ratio", "train fraction");
    if (name == "eval" || name == "infer") {
      shortcut("--checkpoint", "checkpoint", "model checkpoint");
    }
    if (name == "infer") shortcut("--input", "infer.input", "image file or directory");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  const Options& o = options[name];
  RunConfig cfg;
  try {
    KeyValueConfig kv = o.config.empty() ? KeyValueConfig() : KeyValueConfig::load(o.config);
    for (const auto& a : o.extras) kv.apply_override(a);
    for (const auto& a : o.sets) kv.apply_override(a);
    for (const auto& [k, v] : shortcuts[name]) kv.set(k, v);
    cfg = RunConfig::from_config(kv);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  CommandContext ctx;
  ctx.out = &out;
  ctx.err = &err;
  if (const char* root = std::getenv(kOutputRootEnv)) ctx.output_root = root;
  return run_command(name, cfg, ctx);
}

}  // namespace liquidseg::tools
