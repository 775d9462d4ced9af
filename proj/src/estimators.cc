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

#include "gacompress/estimators.h"

#include <string>

#include "gacompress/errors.h"

namespace gacompress {

int64_t ParamCount(const ArchConfig& c) {
  if (auto v = ValidateBasic(c)) throw ValidationError(v->message);
  const int64_t h = c.hidden;
  const int64_t d = c.ffn;
  const int64_t embeddings = c.vocab * h + c.max_seq_len * h + 2 * h;
  const int64_t per_layer =
      4 * (h * h + h) + (h * d + d) + (d * h + h) + 2 * (2 * h);
  const int64_t head = h * h + h + h * c.num_classes + c.num_classes;
  return embeddings + c.layers * per_layer + head;
}

SizeEstimate ModelSize(const ArchConfig& c, int bytes_per_param) {
  if (bytes_per_param != 1 && bytes_per_param != 2 && bytes_per_param != 4 &&
      bytes_per_param != 8) {
    throw ValidationError("bytes_per_param must be 1, 2, 4 or 8, got " +
                          std::to_string(bytes_per_param));
  }
  SizeEstimate out;
  out.param_count = ParamCount(c);
  out.bytes = out.param_count * bytes_per_param;
  out.megabytes = static_cast<double>(out.bytes) / (1024.0 * 1024.0);
  return out;
}

FlopsEstimate ForwardFlops(const ArchConfig& c, int64_t seq_len) {
  if (auto v = ValidateBasic(c)) throw ValidationError(v->message);
  if (seq_len < 1 || seq_len > c.max_seq_len) {
    throw ValidationError("seq_len=" + std::to_string(seq_len) +
                          " outside [1, " + std::to_string(c.max_seq_len) +
                          "]");
  }
  const int64_t n = seq_len;
  const int64_t h = c.hidden;
  const int64_t d = c.ffn;
  const int64_t per_layer = 2 * n * (4 * h * h)  // Q, K, V, O
                            + 2 * n * n * h      // scores
                            + 2 * n * n * h      // context
                            + 2 * n * (2 * h * d);
  const int64_t head = 2 * h * h + 2 * h * c.num_classes;
  FlopsEstimate out;
  out.flops = c.layers * per_layer + head;
  out.gflops = static_cast<double>(out.flops) / 1e9;
  out.seq_len = n;
  return out;
}

nlohmann::json EstimateJson(const SizeEstimate& size,
                            const FlopsEstimate& flops) {
  return nlohmann::json{{"param_count", size.param_count},
                        {"bytes", size.bytes},
                        {"megabytes", size.megabytes},
                        {"flops", flops.flops},
                        {"gflops", flops.gflops},
                        {"seq_len", flops.seq_len}};
}

}  // namespace gacompress
