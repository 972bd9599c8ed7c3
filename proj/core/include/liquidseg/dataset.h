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

#ifndef LIQUIDSEG_DATASET_H_
#define LIQUIDSEG_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "liquidseg/image.h"

// On-disk layout:
//   root/images/{id}.<ext>   RGB image (any readable format)
//   root/masks/{id}.png      8-bit labels, 0 background, 1..14 classes
//   root/manifest.csv        id,split,primary_class[,difficulty]
namespace liquidseg {

class DatasetError : public std::runtime_error {
 public:
  explicit DatasetError(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

struct DatasetRecord {
  std::string id;
  std::filesystem::path image_path;
  std::filesystem::path mask_path;
  std::vector<std::uint8_t> class_set;  // ascending, background excluded
  std::string split;                    // "train", "test", or free-form
  int primary_class = 0;                // most pixels; 0 for all-background
  std::string difficulty;               // "easy", "hard" or empty
};

// Most frequent non-background label (lowest label on ties), 0 if none.
int primary_class_of(const LabelMap& mask);
std::vector<std::uint8_t> class_set_of(const LabelMap& mask);

// Validates every record (files present, matching sizes, labels in 0..14).
// Throws DatasetError listing all problems if any record is invalid.
std::vector<DatasetRecord> load_manifest(const std::filesystem::path& root);

void write_manifest(const std::filesystem::path& root,
                    const std::vector<DatasetRecord>& records);

struct SplitResult {
  std::vector<DatasetRecord> train;
  std::vector<DatasetRecord> test;
  std::vector<std::string> warnings;
};

// Groups by primary class, shuffles each group by seed and assigns
// round-half-up(ratio * N) records to train, apportioned across groups by
// largest remainder so every group is within one record of ratio * size.
// Groups with fewer than two records go to train with a warning. Split
// tags of the returned records are set to "train" / "test".
SplitResult stratified_split(const std::vector<DatasetRecord>& records,
                             double train_ratio, std::uint64_t seed);

}  // namespace liquidseg

#endif  // LIQUIDSEG_DATASET_H_
