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

#include "gacompress/archspace.h"

#include <algorithm>
#include <array>
#include <sstream>
#include <utility>

#include "gacompress/errors.h"

namespace gacompress {

namespace {

constexpr std::array<const char*, 7> kArchKeys = {
    "layers", "hidden", "heads", "ffn", "vocab", "max_seq_len", "num_classes"};

std::optional<Violation> CheckGrid(Rule rule, const char* name, int64_t value,
                                   const Grid& grid) {
  if (grid.contains(value)) return std::nullopt;
  std::ostringstream msg;
  msg << name << "=" << value << " is not on grid [" << grid.lower << ", "
      << grid.upper << "] step " << grid.step;
  return Violation{rule, msg.str()};
}

}  // namespace

const char* RuleName(Rule rule) {
  switch (rule) {
    case Rule::kPositivity:
      return "positivity";
    case Rule::kLayersGrid:
      return "layers_grid";
    case Rule::kHiddenGrid:
      return "hidden_grid";
    case Rule::kHeadsSet:
      return "heads_set";
    case Rule::kFfnGrid:
      return "ffn_grid";
    case Rule::kVocabGrid:
      return "vocab_grid";
    case Rule::kHeadDivisibility:
      return "head_divisibility";
  }
  return "unknown";
}

SearchSpace::SearchSpace(Grid layers, Grid hidden, std::vector<int64_t> heads,
                         Grid ffn, Grid vocab)
    : layers_(layers),
      hidden_(hidden),
      heads_(std::move(heads)),
      ffn_(ffn),
      vocab_(vocab) {
  for (const Grid* g : {&layers_, &hidden_, &ffn_, &vocab_}) {
    if (g->step < 1 || g->lower < 1 || g->upper < g->lower) {
      throw ValidationError("search space grid must satisfy 1 <= lower <= "
                            "upper and step >= 1");
    }
  }
  if (heads_.empty()) throw ValidationError("heads set must not be empty");
  std::sort(heads_.begin(), heads_.end());
  heads_.erase(std::unique(heads_.begin(), heads_.end()), heads_.end());
  if (heads_.front() < 1) throw ValidationError("heads must be positive");
}

SearchSpace SearchSpace::DefaultTable1() {
  return SearchSpace(Grid{1, 12, 1}, Grid{16, 768, 16}, {1, 2, 4, 8},
                     Grid{32, 3072, 32}, Grid{1000, 50000, 1000});
}

int64_t SearchSpace::cardinality() const {
  return layers_.size() * hidden_.size() *
         static_cast<int64_t>(heads_.size()) * ffn_.size() * vocab_.size();
}

bool SearchSpace::contains(const ArchConfig& config) const {
  return !Validate(config, *this).has_value();
}

std::optional<Violation> ValidateBasic(const ArchConfig& c) {
  if (c.layers < 1 || c.hidden < 1 || c.heads < 1 || c.ffn < 1 ||
      c.vocab < 1 || c.max_seq_len < 1 || c.num_classes < 1) {
    return Violation{Rule::kPositivity,
                     "all dimensions must be >= 1: " + ToString(c)};
  }
  if (c.hidden % c.heads != 0) {
    std::ostringstream msg;
    msg << "hidden=" << c.hidden << " is not divisible by heads=" << c.heads;
    return Violation{Rule::kHeadDivisibility, msg.str()};
  }
  return std::nullopt;
}

std::optional<Violation> Validate(const ArchConfig& c,
                                  const SearchSpace& space) {
  if (c.max_seq_len < 1 || c.num_classes < 1) {
    return Violation{Rule::kPositivity,
                     "max_seq_len and num_classes must be >= 1"};
  }
  if (auto v = CheckGrid(Rule::kLayersGrid, "layers", c.layers, space.layers()))
    return v;
  if (auto v = CheckGrid(Rule::kHiddenGrid, "hidden", c.hidden, space.hidden()))
    return v;
  const auto& heads = space.heads();
  if (!std::binary_search(heads.begin(), heads.end(), c.heads)) {
    std::ostringstream msg;
    msg << "heads=" << c.heads << " is not in the allowed set {";
    for (size_t i = 0; i < heads.size(); ++i) {
      msg << (i ? "," : "") << heads[i];
    }
    msg << "}";
    return Violation{Rule::kHeadsSet, msg.str()};
  }
  if (auto v = CheckGrid(Rule::kFfnGrid, "ffn", c.ffn, space.ffn())) return v;
  if (auto v = CheckGrid(Rule::kVocabGrid, "vocab", c.vocab, space.vocab()))
    return v;
  if (c.hidden % c.heads != 0) {
    std::ostringstream msg;
    msg << "hidden=" << c.hidden << " is not divisible by heads=" << c.heads;
    return Violation{Rule::kHeadDivisibility, msg.str()};
  }
  return std::nullopt;
}

ArchConfig PretrainedReference() {
  return ArchConfig{.layers = 12,
                    .hidden = 768,
                    .heads = 12,
                    .ffn = 3072,
                    .vocab = 50265,
                    .max_seq_len = 512,
                    .num_classes = 2};
}

nlohmann::json ToJson(const ArchConfig& c) {
  return nlohmann::json{{"layers", c.layers},   {"hidden", c.hidden},
                        {"heads", c.heads},     {"ffn", c.ffn},
                        {"vocab", c.vocab},     {"max_seq_len", c.max_seq_len},
                        {"num_classes", c.num_classes}};
}

ArchConfig ArchConfigFromJson(const nlohmann::json& doc) {
  if (!doc.is_object()) {
    throw ValidationError("architecture document must be a flat object");
  }
  for (const auto& [key, value] : doc.items()) {
    if (std::find(kArchKeys.begin(), kArchKeys.end(), key) == kArchKeys.end()) {
      throw ValidationError("unknown architecture key: " + key);
    }
  }
  auto get = [&](const char* key) -> int64_t {
    auto it = doc.find(key);
    if (it == doc.end()) {
      throw ValidationError(std::string("missing architecture key: ") + key);
    }
    if (!it->is_number_integer()) {
      throw ValidationError(std::string("architecture key must be an integer: ") +
                            key);
    }
    return it->get<int64_t>();
  };
  ArchConfig c;
  c.layers = get("layers");
  c.hidden = get("hidden");
  c.heads = get("heads");
  c.ffn = get("ffn");
  c.vocab = get("vocab");
  c.max_seq_len = get("max_seq_len");
  c.num_classes = get("num_classes");
  return c;
}

std::string ToString(const ArchConfig& c) {
  std::ostringstream os;
  os << "{L:" << c.layers << ",H:" << c.hidden << ",A:" << c.heads
     << ",D:" << c.ffn << ",V:" << c.vocab << ",S:" << c.max_seq_len
     << ",C:" << c.num_classes << "}";
  return os.str();
}

}  // namespace gacompress
