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

#include "liquidseg/dataset.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "liquidseg/rng.h"

namespace liquidseg {
namespace {

std::string join_lines(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) {
    if (!s.empty()) s += '\n';
    s += l;
  }
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) {
      field.pop_back();
    }
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

DatasetError::DatasetError(std::vector<std::string> diagnostics)
    : std::runtime_error(join_lines(diagnostics)),
      diagnostics_(std::move(diagnostics)) {}

int primary_class_of(const LabelMap& mask) {
  std::array<std::uint64_t, 256> counts{};
  for (std::uint8_t l : mask.labels) ++counts[l];
  int best = 0;
  for (int c = 1; c <= kNumLiquidClasses; ++c) {
    if (counts[c] > 0 && (best == 0 || counts[c] > counts[best])) best = c;
  }
  return best;
}

std::vector<std::uint8_t> class_set_of(const LabelMap& mask) {
  std::array<bool, 256> present{};
  for (std::uint8_t l : mask.labels) present[l] = true;
  std::vector<std::uint8_t> out;
  for (int c = 1; c <= kNumLiquidClasses; ++c) {
    if (present[c]) out.push_back(static_cast<std::uint8_t>(c));
  }
  return out;
}

std::vector<DatasetRecord> load_manifest(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  const fs::path manifest = root / "manifest.csv";
  std::ifstream in(manifest);
  if (!in) throw DatasetError({"cannot open " + manifest.string()});

  std::string line;
  if (!std::getline(in, line)) return {};
  const auto header = split_csv_line(line);
  auto column = [&](const std::string& name) -> int {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int id_col = column("id");
  const int split_col = column("split");
  const int difficulty_col = column("difficulty");
  if (id_col < 0 || split_col < 0 || column("primary_class") < 0) {
    throw DatasetError({manifest.string() +
                        ": header must contain id,split,primary_class"});
  }

  std::map<std::string, fs::path> images;
  if (fs::is_directory(root / "images")) {
    for (const auto& entry : fs::directory_iterator(root / "images")) {
      if (entry.is_regular_file()) {
        images.emplace(entry.path().stem().string(), entry.path());
      }
    }
  }

  std::vector<DatasetRecord> records;
  std::vector<std::string> errors;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    auto field = [&](int col) {
      return col >= 0 && col < static_cast<int>(fields.size()) ? fields[col]
                                                               : std::string();
    };
    DatasetRecord r;
    r.id = field(id_col);
    r.split = field(split_col);
    r.difficulty = field(difficulty_col);
    const std::string where = manifest.string() + ":" + std::to_string(line_no) +
                              " (" + r.id + "): ";
    if (r.id.empty()) {
      errors.push_back(where + "empty id");
      continue;
    }
    auto img = images.find(r.id);
    if (img == images.end()) {
      errors.push_back(where + "missing image");
      continue;
    }
    r.image_path = img->second;
    r.mask_path = root / "masks" / (r.id + ".png");
    if (!fs::exists(r.mask_path)) {
      errors.push_back(where + "missing mask " + r.mask_path.string());
      continue;
    }
    try {
      const LabelMap mask = read_label_map(r.mask_path);
      const Image image = read_image(r.image_path);
      if (image.height != mask.height || image.width != mask.width) {
        errors.push_back(where + "size mismatch: image " +
                         std::to_string(image.height) + "x" +
                         std::to_string(image.width) + ", mask " +
                         std::to_string(mask.height) + "x" +
                         std::to_string(mask.width));
        continue;
      }
      const auto bad = std::find_if(
          mask.labels.begin(), mask.labels.end(),
          [](std::uint8_t l) { return l > kNumLiquidClasses; });
      if (bad != mask.labels.end()) {
        errors.push_back(where + "label out of range: " + std::to_string(*bad));
        continue;
      }
      r.class_set = class_set_of(mask);
      r.primary_class = primary_class_of(mask);
    } catch (const ImageIoError& e) {
      errors.push_back(where + e.what());
      continue;
    }
    records.push_back(std::move(r));
  }
  if (!errors.empty()) throw DatasetError(std::move(errors));
  return records;
}

void write_manifest(const std::filesystem::path& root,
                    const std::vector<DatasetRecord>& records) {
  const bool with_difficulty =
      std::any_of(records.begin(), records.end(),
                  [](const DatasetRecord& r) { return !r.difficulty.empty(); });
  std::ostringstream out;
  out << "id,split,primary_class" << (with_difficulty ? ",difficulty" : "")
      << '\n';
  for (const auto& r : records) {
    out << r.id << ',' << r.split << ',' << r.primary_class;
    if (with_difficulty) out << ',' << r.difficulty;
    out << '\n';
  }
  const auto path = root / "manifest.csv";
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw DatasetError({"cannot write " + path.string()});
  file << out.str();
}

SplitResult stratified_split(const std::vector<DatasetRecord>& records,
                             double train_ratio, std::uint64_t seed) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    throw std::invalid_argument("stratified_split: train_ratio must be in (0, 1)");
  }
  std::map<int, std::vector<DatasetRecord>> groups;
  for (const auto& r : records) groups[r.primary_class].push_back(r);

  SplitResult result;
  struct Quota {
    int cls;
    std::size_t base;
    double remainder;
  };
  std::vector<Quota> quotas;
  std::size_t eligible = 0;
  for (auto& [cls, group] : groups) {
    std::sort(group.begin(), group.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(cls)));
    rng.shuffle(group.begin(), group.end());
    if (group.size() < 2) {
      result.warnings.push_back("class " + std::to_string(cls) + " has " +
                                std::to_string(group.size()) +
                                " record(s); all assigned to train");
      continue;
    }
    eligible += group.size();
    const double exact = train_ratio * static_cast<double>(group.size());
    const auto base = static_cast<std::size_t>(std::floor(exact + 1e-9));
    quotas.push_back({cls, base, exact - static_cast<double>(base)});
  }
  const auto target = static_cast<std::size_t>(
      std::floor(train_ratio * static_cast<double>(eligible) + 0.5 + 1e-9));
  std::size_t assigned = 0;
  for (const auto& q : quotas) assigned += q.base;
  std::vector<std::size_t> order(quotas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quotas[a].remainder > quotas[b].remainder;
  });
  std::map<int, std::size_t> n_train;
  for (const auto& q : quotas) n_train[q.cls] = q.base;
  for (std::size_t i = 0; assigned < target && i < order.size(); ++i, ++assigned) {
    ++n_train[quotas[order[i]].cls];
  }

  for (auto& [cls, group] : groups) {
    const std::size_t k = group.size() < 2 ? group.size() : n_train[cls];
    for (std::size_t i = 0; i < group.size(); ++i) {
      DatasetRecord r = group[i];
      r.split = i < k ? "train" : "test";
      (i < k ? result.train : result.test).push_back(std::move(r));
    }
  }
  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(result.train.begin(), result.train.end(), by_id);
  std::sort(result.test.begin(), result.test.end(), by_id);
  return result;
}

}  // namespace liquidseg
