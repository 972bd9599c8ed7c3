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

#include "liquidseg/run_config.h"

#include <fstream>
#include <sstream>

namespace liquidseg {
namespace {

std::string classes_to_string(const std::vector<std::uint8_t>& classes) {
  std::string s;
  for (auto c : classes) {
    if (!s.empty()) s += ',';
    s += std::to_string(c);
  }
  return s;
}

std::vector<std::uint8_t> classes_from_string(const std::string& s) {
  std::vector<std::uint8_t> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    int v = 0;
    try {
      std::size_t used = 0;
      v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("synth.classes: bad class id '" + item + "'");
    }
    if (v < 1 || v > kNumLiquidClasses) {
      throw ConfigError("synth.classes: class id out of range: " + item);
    }
    out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

std::size_t get_size(const KeyValueConfig& c, const std::string& key,
                     std::size_t fallback) {
  const long long v = c.get_int(key, static_cast<long long>(fallback));
  if (v < 0) throw ConfigError(key + ": must be non-negative");
  return static_cast<std::size_t>(v);
}

void read_model(const KeyValueConfig& c, ModelConfig& m) {
  m.patch_size = get_size(c, "model.patch_size", m.patch_size);
  m.width = get_size(c, "model.width", m.width);
  m.backbone_depth = get_size(c, "model.backbone_depth", m.backbone_depth);
  m.joint_depth = get_size(c, "model.joint_depth", m.joint_depth);
  m.num_queries = get_size(c, "model.num_queries", m.num_queries);
  m.num_classes = get_size(c, "model.num_classes", m.num_classes);
  m.num_heads = get_size(c, "model.num_heads", m.num_heads);
  m.mlp_ratio = get_size(c, "model.mlp_ratio", m.mlp_ratio);
  m.dropout = c.get_double("model.dropout", m.dropout);
  m.input_size = get_size(c, "model.input_size", m.input_size);
  m.use_boundary_branch = c.get_bool("model.boundary_branch", m.use_boundary_branch);
  m.use_boundary_cross_attention =
      c.get_bool("model.boundary_cross_attention", m.use_boundary_cross_attention);
}

void write_model(KeyValueConfig& c, const ModelConfig& m) {
  c.set("model.patch_size", std::to_string(m.patch_size));
  c.set("model.width", std::to_string(m.width));
  c.set("model.backbone_depth", std::to_string(m.backbone_depth));
  c.set("model.joint_depth", std::to_string(m.joint_depth));
  c.set("model.num_queries", std::to_string(m.num_queries));
  c.set("model.num_classes", std::to_string(m.num_classes));
  c.set("model.num_heads", std::to_string(m.num_heads));
  c.set("model.mlp_ratio", std::to_string(m.mlp_ratio));
  c.set("model.dropout", format_double(m.dropout));
  c.set("model.input_size", std::to_string(m.input_size));
  c.set("model.boundary_branch", m.use_boundary_branch ? "true" : "false");
  c.set("model.boundary_cross_attention",
        m.use_boundary_cross_attention ? "true" : "false");
}

const char* b2s(bool b) { return b ? "true" : "false"; }

}  // namespace

RunConfig RunConfig::from_config(const KeyValueConfig& c) {
  RunConfig r;
  read_model(c, r.model);

  auto& a = r.augment;
  a.brightness = c.get_double("augment.brightness", a.brightness);
  a.contrast = c.get_double("augment.contrast", a.contrast);
  a.saturation = c.get_double("augment.saturation", a.saturation);
  a.flip_prob = c.get_double("augment.flip_prob", a.flip_prob);
  a.scale_min = c.get_double("augment.scale_min", a.scale_min);
  a.scale_max = c.get_double("augment.scale_max", a.scale_max);
  a.crop_size = static_cast<int>(r.model.input_size);

  auto& g = r.generator;
  g.height = static_cast<int>(c.get_int("synth.height", g.height));
  g.width = static_cast<int>(c.get_int("synth.width", g.width));
  g.min_blobs = static_cast<int>(c.get_int("synth.min_blobs", g.min_blobs));
  g.max_blobs = static_cast<int>(c.get_int("synth.max_blobs", g.max_blobs));
  g.min_opacity = c.get_double("synth.min_opacity", g.min_opacity);
  g.max_opacity = c.get_double("synth.max_opacity", g.max_opacity);
  g.specular_prob = c.get_double("synth.specular_prob", g.specular_prob);
  g.min_radius = c.get_double("synth.min_radius", g.min_radius);
  g.max_radius = c.get_double("synth.max_radius", g.max_radius);
  g.classes = classes_from_string(c.get_string("synth.classes", ""));
  r.synth_count = static_cast<int>(c.get_int("synth.count", r.synth_count));

  auto& t = r.train;
  auto& o = t.optimizer;
  o.lr = c.get_double("train.lr", o.lr);
  o.beta1 = c.get_double("train.beta1", o.beta1);
  o.beta2 = c.get_double("train.beta2", o.beta2);
  o.eps = c.get_double("train.eps", o.eps);
  o.weight_decay = c.get_double("train.weight_decay", o.weight_decay);
  o.layer_decay = c.get_double("train.layer_decay", o.layer_decay);
  o.grad_clip = c.get_double("train.grad_clip", o.grad_clip);
  const std::string schedule = c.get_string("train.schedule", "constant");
  if (schedule == "constant") {
    t.schedule = LrSchedule::kConstant;
  } else if (schedule == "cosine") {
    t.schedule = LrSchedule::kCosine;
  } else {
    throw ConfigError("train.schedule: expected constant or cosine, got '" + schedule + "'");
  }
  t.epochs = static_cast<int>(c.get_int("train.epochs", t.epochs));
  t.batch_size = static_cast<int>(c.get_int("train.batch_size", t.batch_size));
  t.max_steps = c.get_int("train.max_steps", t.max_steps);
  t.augment = c.get_bool("train.augment", t.augment);
  t.eval_each_epoch = c.get_bool("train.eval_each_epoch", t.eval_each_epoch);
  t.full_resolution_targets =
      c.get_bool("train.full_resolution_targets", t.full_resolution_targets);

  auto& l = r.loss;
  l.class_weight = c.get_double("loss.class_weight", l.class_weight);
  l.bce_weight = c.get_double("loss.bce_weight", l.bce_weight);
  l.dice_weight = c.get_double("loss.dice_weight", l.dice_weight);
  l.dice_eps = c.get_double("loss.dice_eps", l.dice_eps);
  l.boundary_weight = c.get_double("loss.omega", l.boundary_weight);

  const long long seed = c.get_int("seed", 0);
  if (seed < 0) throw ConfigError("seed: must be non-negative");
  r.seed = static_cast<std::uint64_t>(seed);

  r.data_root = c.get_string("data.root", "");
  r.output_dir = c.get_string("output.dir", r.output_dir.string());
  r.checkpoint = c.get_string("checkpoint", "");
  r.infer_input = c.get_string("infer.input", "");
  r.colorize = c.get_bool("infer.colorize", r.colorize);
  r.eval_split = c.get_string("eval.split", r.eval_split);
  r.easy_hard = c.get_bool("eval.easy_hard", r.easy_hard);
  r.split_ratio = c.get_double("split.ratio", r.split_ratio);
  r.stats_grid = static_cast<int>(c.get_int("stats.grid", r.stats_grid));
  r.stats_bins = static_cast<int>(c.get_int("stats.bins", r.stats_bins));

  const auto unused = c.unused_keys();
  if (!unused.empty()) {
    std::string msg = "unknown config key(s):";
    for (const auto& k : unused) msg += " " + k;
    throw ConfigError(msg);
  }
  r.validate();
  return r;
}

KeyValueConfig RunConfig::to_config() const {
  KeyValueConfig c;
  write_model(c, model);
  c.set("augment.brightness", format_double(augment.brightness));
  c.set("augment.contrast", format_double(augment.contrast));
  c.set("augment.saturation", format_double(augment.saturation));
  c.set("augment.flip_prob", format_double(augment.flip_prob));
  c.set("augment.scale_min", format_double(augment.scale_min));
  c.set("augment.scale_max", format_double(augment.scale_max));

  c.set("synth.height", std::to_string(generator.height));
  c.set("synth.width", std::to_string(generator.width));
  c.set("synth.min_blobs", std::to_string(generator.min_blobs));
  c.set("synth.max_blobs", std::to_string(generator.max_blobs));
  c.set("synth.min_opacity", format_double(generator.min_opacity));
  c.set("synth.max_opacity", format_double(generator.max_opacity));
  c.set("synth.specular_prob", format_double(generator.specular_prob));
  c.set("synth.min_radius", format_double(generator.min_radius));
  c.set("synth.max_radius", format_double(generator.max_radius));
  c.set("synth.classes", classes_to_string(generator.classes));
  c.set("synth.count", std::to_string(synth_count));

  const auto& o = train.optimizer;
  c.set("train.lr", format_double(o.lr));
  c.set("train.beta1", format_double(o.beta1));
  c.set("train.beta2", format_double(o.beta2));
  c.set("train.eps", format_double(o.eps));
  c.set("train.weight_decay", format_double(o.weight_decay));
  c.set("train.layer_decay", format_double(o.layer_decay));
  c.set("train.grad_clip", format_double(o.grad_clip));
  c.set("train.schedule", train.schedule == LrSchedule::kCosine ? "cosine" : "constant");
  c.set("train.epochs", std::to_string(train.epochs));
  c.set("train.batch_size", std::to_string(train.batch_size));
  c.set("train.max_steps", std::to_string(train.max_steps));
  c.set("train.augment", b2s(train.augment));
  c.set("train.eval_each_epoch", b2s(train.eval_each_epoch));
  c.set("train.full_resolution_targets", b2s(train.full_resolution_targets));

  c.set("loss.class_weight", format_double(loss.class_weight));
  c.set("loss.bce_weight", format_double(loss.bce_weight));
  c.set("loss.dice_weight", format_double(loss.dice_weight));
  c.set("loss.dice_eps", format_double(loss.dice_eps));
  c.set("loss.omega", format_double(loss.boundary_weight));

  c.set("seed", std::to_string(seed));
  c.set("data.root", data_root.string());
  c.set("output.dir", output_dir.string());
  c.set("checkpoint", checkpoint.string());
  c.set("infer.input", infer_input.string());
  c.set("infer.colorize", b2s(colorize));
  c.set("eval.split", eval_split);
  c.set("eval.easy_hard", b2s(easy_hard));
  c.set("split.ratio", format_double(split_ratio));
  c.set("stats.grid", std::to_string(stats_grid));
  c.set("stats.bins", std::to_string(stats_bins));
  return c;
}

void RunConfig::validate() const {
  model.validate();
  augment.validate();
  generator.validate();
  train.optimizer.validate();
  if (train.epochs < 1) throw std::invalid_argument("train.epochs must be >= 1");
  if (train.batch_size < 1) throw std::invalid_argument("train.batch_size must be >= 1");
  if (train.max_steps < 0) throw std::invalid_argument("train.max_steps must be >= 0");
  if (loss.boundary_weight < 0 || loss.class_weight < 0 || loss.bce_weight < 0 ||
      loss.dice_weight < 0) {
    throw std::invalid_argument("loss weights must be >= 0");
  }
  if (!(loss.dice_eps > 0)) throw std::invalid_argument("loss.dice_eps must be > 0");
  if (!(split_ratio > 0 && split_ratio < 1)) {
    throw std::invalid_argument("split.ratio must be in (0, 1)");
  }
  if (synth_count < 1) throw std::invalid_argument("synth.count must be >= 1");
  if (stats_grid < 1) throw std::invalid_argument("stats.grid must be >= 1");
  if (stats_bins < 1) throw std::invalid_argument("stats.bins must be >= 1");
  if (output_dir.empty()) throw std::invalid_argument("output.dir must be set");
}

std::filesystem::path resolve_output_dir(const RunConfig& cfg,
                                         const std::string& root) {
  if (cfg.output_dir.is_absolute() || root.empty()) return cfg.output_dir;
  return std::filesystem::path(root) / cfg.output_dir;
}

KeyValueConfig model_manifest(const ModelConfig& model) {
  KeyValueConfig c;
  write_model(c, model);
  return c;
}

void write_model_manifest(const std::filesystem::path& checkpoint,
                          const ModelConfig& model) {
  const auto path = checkpoint.string() + ".manifest";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << model_manifest(model).dump();
}

void check_model_manifest(const std::filesystem::path& checkpoint,
                          const ModelConfig& model) {
  const auto path = checkpoint.string() + ".manifest";
  if (!std::filesystem::exists(path)) {
    throw ConfigError("checkpoint " + checkpoint.string() + " has no model manifest");
  }
  const auto stored = KeyValueConfig::load(path).values();
  const auto expected = model_manifest(model).values();
  std::string diffs;
  for (const auto& [k, v] : expected) {
    auto it = stored.find(k);
    const std::string got = it == stored.end() ? "<missing>" : it->second;
    if (got != v && k != "model.dropout") {
      diffs += " " + k + " (checkpoint " + got + ", config " + v + ")";
    }
  }
  if (!diffs.empty()) {
    throw ManifestMismatch("checkpoint does not match model config:" + diffs);
  }
}

}  // namespace liquidseg
