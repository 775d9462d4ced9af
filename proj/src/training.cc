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

#include "gacompress/training.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "gacompress/errors.h"

namespace gacompress {

double MeanLoss(const EncoderModel& model, const ExampleSource& source,
                std::span<double> grads) {
  const size_t count = source.size();
  if (count == 0) throw ValidationError("cannot average a loss over no data");
  const bool want_grads = !grads.empty();
  const double inv = 1.0 / static_cast<double>(count);
  ForwardCache cache;
  Eigen::VectorXd dlogits;
  double total = 0.0;
  for (size_t i = 0; i < count; ++i) {
    const Eigen::VectorXd logits = ForwardTrain(model, source.ids(i), cache);
    total += source.LossAndGrad(i, logits, dlogits);
    if (want_grads) {
      dlogits *= inv;
      Backward(model, cache, dlogits, grads);
    }
  }
  return total * inv;
}

double TrainEpoch(TrainState& state, const ExampleSource& source,
                  int batch_size, double learning_rate, std::mt19937_64& rng) {
  const size_t count = source.size();
  if (count == 0) throw ValidationError("cannot train on an empty dataset");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  std::vector<size_t> order(count);
  std::iota(order.begin(), order.end(), size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  ParamVector grads(state.model.num_weights());
  ForwardCache cache;
  Eigen::VectorXd dlogits;
  double total = 0.0;
  for (size_t start = 0; start < count; start += batch_size) {
    const size_t end = std::min(count, start + static_cast<size_t>(batch_size));
    const double inv = 1.0 / static_cast<double>(end - start);
    std::fill(grads.begin(), grads.end(), 0.0);
    for (size_t b = start; b < end; ++b) {
      const size_t i = order[b];
      const Eigen::VectorXd logits =
          ForwardTrain(state.model, source.ids(i), cache);
      const double loss = source.LossAndGrad(i, logits, dlogits);
      if (!std::isfinite(loss)) {
        throw NumericalError("non-finite loss at optimizer step " +
                             std::to_string(state.step) + ", example " +
                             std::to_string(i));
      }
      total += loss;
      dlogits *= inv;
      Backward(state.model, cache, dlogits, grads);
    }
    AdamStep(state, grads, learning_rate);
  }
  return total / static_cast<double>(count);
}

}  // namespace gacompress
