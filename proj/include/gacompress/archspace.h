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

#ifndef GACOMPRESS_ARCHSPACE_H_
#define GACOMPRESS_ARCHSPACE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace gacompress {

// One point in the BERT-family encoder architecture space. The first five
// fields are searched; max_seq_len and num_classes are fixed per task.
struct ArchConfig {
  int64_t layers = 1;
  int64_t hidden = 16;
  int64_t heads = 1;
  int64_t ffn = 32;
  int64_t vocab = 1000;
  int64_t max_seq_len = 512;
  int64_t num_classes = 2;

  friend bool operator==(const ArchConfig&, const ArchConfig&) = default;
};

// Inclusive integer range with a fixed step.
struct Grid {
  int64_t lower = 1;
  int64_t upper = 1;
  int64_t step = 1;

  int64_t size() const { return (upper - lower) / step + 1; }
  bool contains(int64_t v) const {
    return v >= lower && v <= upper && (v - lower) % step == 0;
  }
  int64_t value_at(int64_t index) const { return lower + index * step; }
};

// Rule names reported by Validate(). Order matches the checks.
enum class Rule {
  kPositivity,
  kLayersGrid,
  kHiddenGrid,
  kHeadsSet,
  kFfnGrid,
  kVocabGrid,
  kHeadDivisibility,
};

const char* RuleName(Rule rule);

struct Violation {
  Rule rule;
  std::string message;
};

class SearchSpace {
 public:
  SearchSpace(Grid layers, Grid hidden, std::vector<int64_t> heads, Grid ffn,
              Grid vocab);

  // Grids of the student search space:
  //   layers [1,12]/1, hidden [16,768]/16, heads {1,2,4,8},
  //   ffn [32,3072]/32, vocab [1000,50000]/1000.
  static SearchSpace DefaultTable1();

  const Grid& layers() const { return layers_; }
  const Grid& hidden() const { return hidden_; }
  const std::vector<int64_t>& heads() const { return heads_; }
  const Grid& ffn() const { return ffn_; }
  const Grid& vocab() const { return vocab_; }

  // Number of distinct (layers, hidden, heads, ffn, vocab) tuples.
  int64_t cardinality() const;

  bool contains(const ArchConfig& config) const;

 private:
  Grid layers_;
  Grid hidden_;
  std::vector<int64_t> heads_;
  Grid ffn_;
  Grid vocab_;
};

// Structural checks only: positive dimensions and hidden % heads == 0.
std::optional<Violation> ValidateBasic(const ArchConfig& config);

// Returns the first violated rule, or nullopt when the config lies on the
// grid of `space` and has an integral per-head dimension.
std::optional<Violation> Validate(const ArchConfig& config,
                                  const SearchSpace& space);

// RoBERTa-base sized encoder: L=12 H=768 A=12 D=3072 V=50265,
// 512 positions, binary head. Outside the student grid.
ArchConfig PretrainedReference();

// Flat document with keys layers, hidden, heads, ffn, vocab, max_seq_len,
// num_classes.
nlohmann::json ToJson(const ArchConfig& config);
// Throws ValidationError on missing keys, non-integers or unknown keys.
ArchConfig ArchConfigFromJson(const nlohmann::json& doc);

std::string ToString(const ArchConfig& config);

}  // namespace gacompress

#endif  // GACOMPRESS_ARCHSPACE_H_
