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

// Closed-form size and cost estimates for an encoder classifier.
//
// Parameter layout (no token-type embeddings):
//   embeddings  V*H + S*H + 2H
//   per layer   4(H^2 + H) + (H*D + D) + (D*H + H) + 4H
//   head        H^2 + H + H*C + C
//
// Forward FLOPs count 2 per multiply-accumulate of every matrix product and
// ignore embedding lookups, softmax, layer-norm, activations and bias adds:
//   per layer   2n(4H^2) + 2n^2 H + 2n^2 H + 2n(2HD)
//   head        2H^2 + 2HC

#ifndef GACOMPRESS_ESTIMATORS_H_
#define GACOMPRESS_ESTIMATORS_H_

#include <cstdint>

#include "gacompress/archspace.h"
#include "json.hpp"

namespace gacompress {

struct SizeEstimate {
  int64_t param_count = 0;
  int64_t bytes = 0;
  double megabytes = 0.0;  // bytes / 2^20
};

struct FlopsEstimate {
  int64_t flops = 0;
  double gflops = 0.0;  // flops / 10^9
  int64_t seq_len = 0;
};

int64_t ParamCount(const ArchConfig& config);

// bytes_per_param must be one of 1, 2, 4, 8.
SizeEstimate ModelSize(const ArchConfig& config, int bytes_per_param = 4);

// Throws ValidationError unless 1 <= seq_len <= config.max_seq_len.
FlopsEstimate ForwardFlops(const ArchConfig& config, int64_t seq_len);

// {param_count, bytes, megabytes, flops, gflops, seq_len}
nlohmann::json EstimateJson(const SizeEstimate& size,
                            const FlopsEstimate& flops);

}  // namespace gacompress

#endif  // GACOMPRESS_ESTIMATORS_H_
