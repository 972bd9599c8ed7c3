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

#ifndef LIQUIDSEG_CHECKPOINT_H_
#define LIQUIDSEG_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "liquidseg/layers.h"
#include "liquidseg/tensor.h"

// Parameter checkpoint container. All integers and reals little-endian:
//
//   char[8]  magic "LQSGCKPT"
//   u32      version (currently 1)
//   u32      tensor count
//   repeated tensor count times:
//     u32    name length, then that many bytes of name
//     u32    rank, then rank x u32 dimensions
//     f32    numel values, row-major
namespace liquidseg {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckpointEntry {
  std::string name;
  Shape shape;
  std::vector<float> values;
  bool operator==(const CheckpointEntry&) const = default;
};

void write_checkpoint(const std::filesystem::path& path,
                      const std::vector<CheckpointEntry>& entries);
std::vector<CheckpointEntry> read_checkpoint(const std::filesystem::path& path);

template <typename T>
std::vector<CheckpointEntry> snapshot_parameters(
    const nn::ParameterList<T>& params);

// Copies values into `params` by name. Every parameter must be present with
// an identical shape; extra entries are an error as well.
template <typename T>
void restore_parameters(const nn::ParameterList<T>& params,
                        const std::vector<CheckpointEntry>& entries);

}  // namespace liquidseg

#endif  // LIQUIDSEG_CHECKPOINT_H_
