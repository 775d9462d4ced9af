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

#ifndef GACOMPRESS_TRAINING_H_
#define GACOMPRESS_TRAINING_H_

#include <cstddef>
#include <random>
#include <span>

#include "gacompress/nn.h"

namespace gacompress {

// A finite set of training examples with a per-example loss on logits.
class ExampleSource {
 public:
  virtual ~ExampleSource() = default;
  virtual size_t size() const = 0;
  virtual std::span<const int32_t> ids(size_t index) const = 0;
  // Returns the loss and writes d(loss)/d(logits) into `dlogits`.
  virtual double LossAndGrad(size_t index, const Eigen::VectorXd& logits,
                             Eigen::VectorXd& dlogits) const = 0;
};

// Mean loss over all examples; when `grads` is non-empty it also accumulates
// the gradient of that mean. Examples are visited in index order.
double MeanLoss(const EncoderModel& model, const ExampleSource& source,
                std::span<double> grads = {});

// One pass over a fresh shuffle of `source` in mini-batches, one Adam step
// per batch. Returns the mean of the per-example losses seen during the pass.
// Throws NumericalError when a loss turns non-finite.
double TrainEpoch(TrainState& state, const ExampleSource& source,
                  int batch_size, double learning_rate, std::mt19937_64& rng);

}  // namespace gacompress

#endif  // GACOMPRESS_TRAINING_H_
