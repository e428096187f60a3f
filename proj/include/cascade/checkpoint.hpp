// Copyright 2026 The Cascade Transfer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CASCADE_CHECKPOINT_HPP_
#define CASCADE_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "cascade/policy.hpp"

namespace cascade {

// Binary layout (all integers and floats little-endian):
//   magic "CASCPOL\0" | u32 version | u32 tensor count
//   per tensor: u16 name length | name | u32 rows | u32 cols
//   per tensor: rows*cols f64, row-major
//   u64 FNV-1a checksum of every preceding byte
inline constexpr char kCheckpointMagic[8] = {'C', 'A', 'S', 'C', 'P', 'O', 'L', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TensorInfo {
  std::string name;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
};

struct CheckpointHeader {
  std::uint32_t version = 0;
  std::vector<TensorInfo> tensors;
  std::uint64_t checksum = 0;
  std::uint64_t file_size = 0;
};

std::vector<std::uint8_t> encode_checkpoint(const PolicyParameters& p);
// Throws FormatError on bad magic, unsupported version, truncation or
// checksum mismatch.
PolicyParameters decode_checkpoint(const std::vector<std::uint8_t>& bytes);
CheckpointHeader read_checkpoint_header(const std::vector<std::uint8_t>& bytes);

// Written to a temporary sibling then renamed into place.
void save_checkpoint(const std::filesystem::path& path, const PolicyParameters& p);
PolicyParameters load_checkpoint(const std::filesystem::path& path);
CheckpointHeader describe_checkpoint(const std::filesystem::path& path);
void print_checkpoint_header(std::ostream& os, const CheckpointHeader& h);

// Hex form of the checksum, used as the checkpoint id in reports.
std::string checkpoint_id(const PolicyParameters& p);

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t n);

}  // namespace cascade

#endif  // CASCADE_CHECKPOINT_HPP_
