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

// Dense BERT-style encoder classifier with an explicit reverse pass.
//
// Forward: token + position embedding, layer-norm, then per layer a
// post-norm self-attention block and a post-norm GELU feed-forward block.
// The first token's final state goes through a tanh pooler and a linear
// classifier. Weights are stored in one flat fp64 buffer; every named tensor
// is a row-major view into it, so gradients and optimizer moments share the
// same layout.

#ifndef GACOMPRESS_NN_H_
#define GACOMPRESS_NN_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gacompress/archspace.h"

namespace gacompress {

using TokenSeq = std::vector<int32_t>;
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
// Aligned storage keeps Eigen reductions over mapped weights bit-stable
// between allocations.
using ParamVector = std::vector<double, Eigen::aligned_allocator<double>>;

struct TensorInfo {
  std::string name;
  std::vector<int64_t> shape;  // 1 or 2 dims
  size_t offset = 0;
  size_t size = 0;
};

// Adds 2*m*n*k for every m x k by k x n product it sees.
struct FlopTally {
  int64_t flops = 0;
  int64_t matmuls = 0;
};

class EncoderModel {
 public:
  // All weights zero. Throws ValidationError on an invalid config.
  explicit EncoderModel(const ArchConfig& config);

  // N(0, 0.02) weights rounded to fp32, layer-norm scales 1, biases and
  // shifts 0.
  static EncoderModel Init(const ArchConfig& config, uint64_t seed);

  const ArchConfig& config() const { return config_; }
  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  const TensorInfo& tensor(const std::string& name) const;

  std::span<const double> weights() const { return weights_; }
  std::span<double> mutable_weights() { return weights_; }
  size_t num_weights() const { return weights_.size(); }

  // Layout-level offsets, used by the forward and backward passes.
  struct LayerSlots {
    size_t wq, bq, wk, bk, wv, bv, wo, bo;
    size_t ln1_g, ln1_b, w_up, b_up, w_down, b_down, ln2_g, ln2_b;
  };
  struct Slots {
    size_t tok_emb, pos_emb, emb_ln_g, emb_ln_b;
    std::vector<LayerSlots> layers;
    size_t pool_w, pool_b, cls_w, cls_b;
  };
  const Slots& slots() const { return slots_; }

  friend bool operator==(const EncoderModel& a, const EncoderModel& b) {
    return a.config_ == b.config_ && a.weights_ == b.weights_;
  }

 private:
  size_t Add(std::string name, std::vector<int64_t> shape);

  ArchConfig config_;
  std::vector<TensorInfo> tensors_;
  Slots slots_{};
  ParamVector weights_;
};

// Activations kept by ForwardTrain for the reverse pass.
struct LayerCache {
  RowMatrix x_in, q, k, v, ctx;
  std::vector<RowMatrix> probs;  // one n x n matrix per head
  RowMatrix xhat1, x1, u, g, xhat2, x_out;
  Eigen::VectorXd rstd1, rstd2;
};

struct ForwardCache {
  TokenSeq ids;
  RowMatrix xhat0, x0;
  Eigen::VectorXd rstd0;
  std::vector<LayerCache> layers;
  Eigen::RowVectorXd pooled;  // tanh output
  Eigen::VectorXd logits;
};

// Throws ValidationError for empty input, too-long input or token ids outside
// [0, vocab).
void CheckTokens(const ArchConfig& config, std::span<const int32_t> ids);

Eigen::VectorXd Forward(const EncoderModel& model, std::span<const int32_t> ids,
                        FlopTally* tally = nullptr);

Eigen::VectorXd ForwardTrain(const EncoderModel& model,
                             std::span<const int32_t> ids, ForwardCache& cache);

// Accumulates d(loss)/d(weights) into `grads` given d(loss)/d(logits).
void Backward(const EncoderModel& model, const ForwardCache& cache,
              const Eigen::VectorXd& dlogits, std::span<double> grads);

struct TrainState {
  EncoderModel model;
  ParamVector m;
  ParamVector v;
  int64_t step = 0;
  uint64_t rng_seed = 0;

  TrainState(EncoderModel model, uint64_t seed);
};

// Adam with beta1 0.9, beta2 0.999, eps 1e-8 and bias correction. Updated
// weights are rounded to fp32 so a saved checkpoint reloads exactly.
void AdamStep(TrainState& state, std::span<const double> grads, double lr);

// Numerically stable softmax.
Eigen::VectorXd Softmax(const Eigen::VectorXd& logits);

int ArgMax(const Eigen::VectorXd& logits);

}  // namespace gacompress

#endif  // GACOMPRESS_NN_H_
