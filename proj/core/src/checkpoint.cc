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

#include "liquidseg/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

namespace liquidseg {
namespace {

constexpr char kMagic[8] = {'L', 'Q', 'S', 'G', 'C', 'K', 'P', 'T'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  Reader(std::string bytes, std::string source)
      : bytes_(std::move(bytes)), source_(std::move(source)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::string bytes(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) {
      throw CheckpointError("checkpoint " + source_ + " is truncated");
    }
  }

  std::string bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_checkpoint(const std::filesystem::path& path,
                      const std::vector<CheckpointEntry>& entries) {
  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    if (numel(e.shape) != e.values.size()) {
      throw CheckpointError("entry " + e.name + " has inconsistent shape");
    }
    put_u32(out, static_cast<std::uint32_t>(e.name.size()));
    out += e.name;
    put_u32(out, static_cast<std::uint32_t>(e.shape.size()));
    for (std::size_t d : e.shape) put_u32(out, static_cast<std::uint32_t>(d));
    for (float f : e.values) put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw CheckpointError("cannot open " + path.string() + " for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw CheckpointError("failed writing " + path.string());
}

std::vector<CheckpointEntry> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw CheckpointError("cannot open checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(file)),
                    std::istreambuf_iterator<char>());
  Reader r(std::move(bytes), path.string());
  if (r.bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw CheckpointError(path.string() + " is not a liquidseg checkpoint");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " +
                          std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  std::vector<CheckpointEntry> entries(count);
  for (auto& e : entries) {
    e.name = r.bytes(r.u32());
    const std::uint32_t rank = r.u32();
    for (std::uint32_t i = 0; i < rank; ++i) e.shape.push_back(r.u32());
    e.values.resize(numel(e.shape));
    for (auto& f : e.values) f = std::bit_cast<float>(r.u32());
  }
  if (!r.done()) {
    throw CheckpointError("trailing bytes in checkpoint " + path.string());
  }
  return entries;
}

template <typename T>
std::vector<CheckpointEntry> snapshot_parameters(
    const nn::ParameterList<T>& params) {
  std::vector<CheckpointEntry> out;
  out.reserve(params.size());
  for (const auto& p : params) {
    CheckpointEntry e;
    e.name = p.name;
    e.shape = p.var.shape();
    e.values.assign(p.var.data().begin(), p.var.data().end());
    out.push_back(std::move(e));
  }
  return out;
}

template <typename T>
void restore_parameters(const nn::ParameterList<T>& params,
                        const std::vector<CheckpointEntry>& entries) {
  std::map<std::string, const CheckpointEntry*> by_name;
  for (const auto& e : entries) {
    if (!by_name.emplace(e.name, &e).second) {
      throw CheckpointError("duplicate checkpoint entry " + e.name);
    }
  }
  if (by_name.size() != params.size()) {
    throw CheckpointError("checkpoint has " + std::to_string(by_name.size()) +
                          " tensors, model expects " +
                          std::to_string(params.size()));
  }
  for (const auto& p : params) {
    auto it = by_name.find(p.name);
    if (it == by_name.end()) {
      throw CheckpointError("checkpoint is missing " + p.name);
    }
    if (it->second->shape != p.var.shape()) {
      throw CheckpointError("checkpoint shape " +
                            shape_string(it->second->shape) + " for " +
                            p.name + " does not match model shape " +
                            shape_string(p.var.shape()));
    }
    Var<T> v = p.var;
    auto dst = v.mutable_data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      dst[i] = static_cast<T>(it->second->values[i]);
    }
  }
}

template std::vector<CheckpointEntry> snapshot_parameters(
    const nn::ParameterList<float>&);
template std::vector<CheckpointEntry> snapshot_parameters(
    const nn::ParameterList<double>&);
template void restore_parameters(const nn::ParameterList<float>&,
                                 const std::vector<CheckpointEntry>&);
template void restore_parameters(const nn::ParameterList<double>&,
                                 const std::vector<CheckpointEntry>&);

}  // namespace liquidseg
