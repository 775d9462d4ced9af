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

#include "gacompress/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "gacompress/errors.h"

namespace gacompress {

namespace {

constexpr char kMagic[8] = {'G', 'A', 'C', 'K', 'P', 'T', '0', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename T>
void Put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T Get(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ValidationError("checkpoint truncated");
  return value;
}

std::string GetString(std::ifstream& in, uint32_t len) {
  if (len > (1u << 24)) throw ValidationError("checkpoint string too long");
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw ValidationError("checkpoint truncated");
  return s;
}

}  // namespace

void SaveCheckpoint(const EncoderModel& model,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DependencyError("cannot open " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const std::string arch = ToJson(model.config()).dump();
  Put<uint32_t>(out, static_cast<uint32_t>(arch.size()));
  out.write(arch.data(), static_cast<std::streamsize>(arch.size()));
  Put<uint32_t>(out, static_cast<uint32_t>(model.tensors().size()));
  std::vector<float> payload;
  for (const TensorInfo& t : model.tensors()) {
    Put<uint32_t>(out, static_cast<uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    Put<uint32_t>(out, static_cast<uint32_t>(t.shape.size()));
    for (int64_t dim : t.shape) Put<uint64_t>(out, static_cast<uint64_t>(dim));
    payload.resize(t.size);
    const double* src = model.weights().data() + t.offset;
    for (size_t i = 0; i < t.size; ++i) payload[i] = static_cast<float>(src[i]);
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(float)));
  }
  if (!out) throw DependencyError("failed writing " + path.string());
}

EncoderModel LoadCheckpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw DependencyError("checkpoint not found: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ValidationError(path.string() + " is not a gacompress checkpoint");
  }
  const std::string arch = GetString(in, Get<uint32_t>(in));
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(arch);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad checkpoint header: ") + e.what());
  }
  EncoderModel model(ArchConfigFromJson(doc));
  const uint32_t count = Get<uint32_t>(in);
  if (count != model.tensors().size()) {
    throw ValidationError("checkpoint tensor count does not match layout");
  }
  std::vector<float> payload;
  auto weights = model.mutable_weights();
  for (const TensorInfo& t : model.tensors()) {
    const std::string name = GetString(in, Get<uint32_t>(in));
    if (name != t.name) {
      throw ValidationError("unexpected tensor " + name + ", wanted " + t.name);
    }
    const uint32_t rank = Get<uint32_t>(in);
    if (rank != t.shape.size()) {
      throw ValidationError("rank mismatch for tensor " + name);
    }
    for (int64_t dim : t.shape) {
      if (Get<uint64_t>(in) != static_cast<uint64_t>(dim)) {
        throw ValidationError("shape mismatch for tensor " + name);
      }
    }
    payload.resize(t.size);
    in.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(float)));
    if (!in) throw ValidationError("checkpoint truncated in " + name);
    for (size_t i = 0; i < t.size; ++i) weights[t.offset + i] = payload[i];
  }
  return model;
}

}  // namespace gacompress
