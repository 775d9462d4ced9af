// Copyright 2026 The gacompress Authors.
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

// Model checkpoint container, little-endian throughout:
//
//   magic        8 bytes  "GACKPT01"
//   arch_len     u32      length of the ArchConfig JSON document
//   arch         arch_len bytes of UTF-8 JSON
//   num_tensors  u32
//   per tensor:  u32 name_len, name bytes, u32 rank, rank x u64 dims,
//                prod(dims) x f32 row-major payload

#ifndef GACOMPRESS_CHECKPOINT_H_
#define GACOMPRESS_CHECKPOINT_H_

#include <filesystem>

#include "gacompress/nn.h"

namespace gacompress {

void SaveCheckpoint(const EncoderModel& model, const std::filesystem::path& path);

// Throws DependencyError if the file is missing and ValidationError if it is
// malformed or its tensors do not match the stored architecture.
EncoderModel LoadCheckpoint(const std::filesystem::path& path);

}  // namespace gacompress

#endif  // GACOMPRESS_CHECKPOINT_H_
