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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gacompress/errors.h"
#include "gacompress/gasearch.h"
#include "gacompress/nn.h"

namespace gacompress {
namespace {

// Counts the scalars of an instantiated model tensor by tensor.
int64_t EnumerateWeights(const ArchConfig& config) {
  const EncoderModel model(config);
  int64_t total = 0;
  for (const TensorInfo& t : model.tensors()) {
    int64_t n = 1;
    for (int64_t dim : t.shape) n *= dim;
    total += n;
  }
  return total;
}

// Runs a real forward pass and returns the tallied 2*m*n*k per product.
int64_t TallyForward(const ArchConfig& config, int64_t seq_len) {
  const EncoderModel model = EncoderModel::Init(config, 3);
  TokenSeq ids(seq_len);
  for (int64_t i = 0; i < seq_len; ++i) ids[i] = static_cast<int32_t>(i % config.vocab);
  FlopTally tally;
  Forward(model, ids, &tally);
  return tally.flops;
}

const std::vector<ArchConfig>& TinyConfigs() {
  static const std::vector<ArchConfig> configs = {
      {.layers = 1, .hidden = 16, .heads = 1, .ffn = 32, .vocab = 1000,
       .max_seq_len = 512, .num_classes = 2},
      {.layers = 1, .hidden = 2, .heads = 1, .ffn = 4, .vocab = 8,
       .max_seq_len = 4, .num_classes = 2},
      {.layers = 2, .hidden = 8, .heads = 2, .ffn = 16, .vocab = 20,
       .max_seq_len = 8, .num_classes = 3},
      {.layers = 3, .hidden = 12, .heads = 3, .ffn = 20, .vocab = 30,
       .max_seq_len = 10, .num_classes = 2},
  };
  return configs;
}

TEST(ParamCountTest, MatchesWeightEnumerationOracle) {
  for (const ArchConfig& c : TinyConfigs()) {
    EXPECT_EQ(ParamCount(c), EnumerateWeights(c)) << ToString(c);
  }
}

TEST(ParamCountTest, SmallestGridStudentFrozenValue) {
  // {L:1,H:16,A:1,D:32,V:1000,S:512,C:2} counted by hand:
  // embeddings 16000 + 8192 + 32, layer 1088 + 544 + 528 + 64,
  // pooler 272, classifier 34.
  const ArchConfig c = TinyConfigs()[0];
  EXPECT_EQ(EnumerateWeights(c), 26754);
  EXPECT_EQ(ParamCount(c), 26754);
}

TEST(ParamCountTest, ReferenceMatchesPublishedScale) {
  const ArchConfig ref = PretrainedReference();
  const int64_t params = ParamCount(ref);
  EXPECT_EQ(params, 124644866);
  EXPECT_NEAR(static_cast<double>(params), 125e6, 0.03 * 125e6);
  const SizeEstimate size = ModelSize(ref);
  EXPECT_NEAR(size.megabytes, 476.0, 0.03 * 476.0);
  EXPECT_EQ(size.bytes, params * 4);
}

TEST(ParamCountTest, LinearInFfn) {
  ArchConfig c{.layers = 5, .hidden = 64, .heads = 4, .ffn = 128, .vocab = 3000};
  const int64_t base = ParamCount(c);
  const int64_t increment = 96;
  c.ffn += increment;
  EXPECT_EQ(ParamCount(c) - base,
            c.layers * (2 * c.hidden * increment + increment));
}

TEST(ModelSizeTest, ScalesWithBytesPerParam) {
  const ArchConfig c{.layers = 3, .hidden = 512, .heads = 4, .ffn = 1024,
                     .vocab = 10000};
  EXPECT_DOUBLE_EQ(ModelSize(c, 8).megabytes, 2.0 * ModelSize(c, 4).megabytes);
  EXPECT_DOUBLE_EQ(ModelSize(c, 2).megabytes, 0.5 * ModelSize(c, 4).megabytes);
  EXPECT_THROW(ModelSize(c, 3), ValidationError);
}

TEST(ForwardFlopsTest, MatchesInstrumentedMatmulOracle) {
  for (const ArchConfig& c : TinyConfigs()) {
    for (int64_t n : {int64_t{1}, int64_t{2}, std::min<int64_t>(4, c.max_seq_len),
                      c.max_seq_len}) {
      if (n > 64) continue;
      EXPECT_EQ(ForwardFlops(c, n).flops, TallyForward(c, n))
          << ToString(c) << " n=" << n;
    }
  }
}

TEST(ForwardFlopsTest, TinyConfigFrozenTally) {
  // Instrumented forward of {L:1,H:2,A:1,D:4,V:8,S:4,C:2} on 2 tokens:
  // QKVO 4*2*2*2*2 + scores 2*2*2*2 + context 2*2*2*2 + FFN 2*(2*2*2*4)
  // + pooler 2*2*2 + classifier 2*2*2 = 64 + 16 + 16 + 64 + 8 + 8.
  const ArchConfig c = TinyConfigs()[1];
  EXPECT_EQ(TallyForward(c, 2), 176);
  EXPECT_EQ(ForwardFlops(c, 2).flops, 176);
}

TEST(ForwardFlopsTest, LinearInLayers) {
  ArchConfig c{.layers = 1, .hidden = 256, .heads = 4, .ffn = 1024, .vocab = 5000};
  const int64_t f1 = ForwardFlops(c, 128).flops;
  c.layers = 2;
  const int64_t f2 = ForwardFlops(c, 128).flops;
  c.layers = 3;
  const int64_t f3 = ForwardFlops(c, 128).flops;
  EXPECT_EQ(f2 - f1, f3 - f2);
}

TEST(ForwardFlopsTest, ReferenceExceedsEveryGridStudent) {
  const int64_t ref = ForwardFlops(PretrainedReference(), 400).flops;
  const SearchSpace space = SearchSpace::DefaultTable1();
  const ArchConfig largest{.layers = 12, .hidden = 768, .heads = 8, .ffn = 3072,
                           .vocab = 50000};
  EXPECT_GT(ref, ForwardFlops(largest, 400).flops - 1);
  // Equal matmul dimensions give equal FLOPs; heads and vocab do not enter.
  EXPECT_EQ(ref, ForwardFlops(largest, 400).flops);
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const ArchConfig s = ToArch(RandomChromosome(space, rng), ArchContext{});
    if (s.layers == 12 && s.hidden == 768 && s.ffn == 3072) continue;
    EXPECT_GT(ref, ForwardFlops(s, 400).flops);
  }
}

TEST(ForwardFlopsTest, RejectsOutOfRangeSequenceLength) {
  const ArchConfig c = TinyConfigs()[2];
  EXPECT_THROW(ForwardFlops(c, 0), ValidationError);
  EXPECT_THROW(ForwardFlops(c, c.max_seq_len + 1), ValidationError);
  EXPECT_NO_THROW(ForwardFlops(c, c.max_seq_len));
}

TEST(EstimatorPropertyTest, StrictlyMonotoneInSearchedHyperparameters) {
  const SearchSpace space = SearchSpace::DefaultTable1();
  Rng rng(17);
  for (int i = 0; i < 500; ++i) {
    const ArchConfig base = ToArch(RandomChromosome(space, rng), ArchContext{});
    const int64_t p0 = ParamCount(base);
    const int64_t f0 = ForwardFlops(base, 400).flops;

    ArchConfig c = base;
    c.layers += 1;
    EXPECT_GT(ParamCount(c), p0);
    EXPECT_GT(ForwardFlops(c, 400).flops, f0);

    c = base;
    c.hidden += 16;
    c.heads = 1;
    ArchConfig b1 = base;
    b1.heads = 1;
    EXPECT_GT(ParamCount(c), ParamCount(b1));
    EXPECT_GT(ForwardFlops(c, 400).flops, ForwardFlops(b1, 400).flops);

    c = base;
    c.ffn += 32;
    EXPECT_GT(ParamCount(c), p0);
    EXPECT_GT(ForwardFlops(c, 400).flops, f0);

    c = base;
    c.vocab += 1000;
    EXPECT_GT(ParamCount(c), p0);
    EXPECT_EQ(ForwardFlops(c, 400).flops, f0);

    EXPECT_GT(ForwardFlops(base, 401).flops, f0);
  }
}

TEST(EstimatorPropertyTest, NoOverflowAtGridMaxima) {
  const ArchConfig c{.layers = 12, .hidden = 768, .heads = 8, .ffn = 3072,
                     .vocab = 50000};
  EXPECT_GT(ParamCount(c), 0);
  EXPECT_GT(ForwardFlops(c, 512).flops, 0);
  EXPECT_GT(ModelSize(c, 8).bytes, 0);
}

TEST(EstimateJsonTest, HasExpectedKeys) {
  const ArchConfig ref = PretrainedReference();
  const auto doc = EstimateJson(ModelSize(ref), ForwardFlops(ref, 400));
  for (const char* key :
       {"param_count", "bytes", "megabytes", "flops", "gflops", "seq_len"}) {
    EXPECT_TRUE(doc.contains(key)) << key;
  }
  EXPECT_EQ(doc["seq_len"], 400);
}

}  // namespace
}  // namespace gacompress
