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

#include "gacompress/corpus.h"

#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <string>

#include "gacompress/errors.h"
#include "test_util.h"

namespace gacompress {
namespace {

using testing::ScratchDir;

bool HasBigram(const TokenSeq& ids, int32_t first, int32_t second) {
  for (size_t i = 0; i + 1 < ids.size(); ++i) {
    if (ids[i] == first && ids[i + 1] == second) return true;
  }
  return false;
}

SyntheticTaskSpec SmallSpec() {
  SyntheticTaskSpec spec;
  spec.labeled = 600;
  spec.unlabeled = 600;
  spec.val = 200;
  spec.test = 200;
  spec.rng_seed = 3;
  return spec;
}

std::vector<const std::vector<Example>*> Splits(const Corpus& c) {
  return {&c.labeled, &c.unlabeled, &c.val, &c.test};
}

TEST(GenerateTest, DeterministicBySeed) {
  const Corpus a = Generate(SmallSpec());
  const Corpus b = Generate(SmallSpec());
  for (size_t s = 0; s < 4; ++s) {
    const auto& x = *Splits(a)[s];
    const auto& y = *Splits(b)[s];
    ASSERT_EQ(x.size(), y.size());
    for (size_t i = 0; i < x.size(); ++i) {
      EXPECT_EQ(x[i].ids, y[i].ids);
      EXPECT_EQ(x[i].label, y[i].label);
    }
  }
  SyntheticTaskSpec other = SmallSpec();
  other.rng_seed = 4;
  EXPECT_NE(Generate(other).labeled[0].ids, a.labeled[0].ids);
}

TEST(GenerateTest, DefaultSplitsAreDisjointAndSized) {
  const SyntheticTaskSpec spec;
  const Corpus c = Generate(spec);
  EXPECT_EQ(c.labeled.size(), 4000u);
  EXPECT_EQ(c.unlabeled.size(), c.labeled.size());
  EXPECT_EQ(c.val.size(), 1000u);
  EXPECT_EQ(c.test.size(), 1000u);
  std::set<TokenSeq> seen;
  size_t total = 0;
  for (const auto* split : Splits(c)) {
    for (const Example& ex : *split) {
      seen.insert(ex.ids);
      ++total;
    }
  }
  EXPECT_EQ(seen.size(), total);
}

TEST(GenerateTest, RuleRecheckOracleMatchesLabels) {
  const SyntheticTaskSpec spec;
  const Corpus c = Generate(spec);
  for (const auto* split : {&c.labeled, &c.val, &c.test}) {
    for (const Example& ex : *split) {
      ASSERT_EQ(ex.label,
                HasBigram(ex.ids, spec.trigger_first, spec.trigger_second) ? 1 : 0);
    }
  }
}

TEST(GenerateTest, ShapeAndBalance) {
  const SyntheticTaskSpec spec;
  const Corpus c = Generate(spec);
  for (const auto* split : {&c.labeled, &c.val, &c.test}) {
    int positives = 0;
    for (const Example& ex : *split) {
      positives += ex.label;
      ASSERT_GE(static_cast<int>(ex.ids.size()), spec.min_len);
      ASSERT_LE(static_cast<int>(ex.ids.size()), spec.max_len);
      ASSERT_EQ(ex.ids[0], kClsToken);
      for (size_t i = 1; i < ex.ids.size(); ++i) {
        ASSERT_GE(ex.ids[i], 2);
        ASSERT_LT(ex.ids[i], spec.vocab_size);
      }
    }
    const double rate = static_cast<double>(positives) / split->size();
    EXPECT_GE(rate, 0.45);
    EXPECT_LE(rate, 0.55);
  }
  for (const Example& ex : c.unlabeled) EXPECT_EQ(ex.label, -1);
}

TEST(GenerateTest, InfeasibleRequestsFail) {
  SyntheticTaskSpec spec = SmallSpec();
  spec.vocab_size = 44;
  spec.min_len = 3;
  spec.max_len = 3;
  spec.labeled = 5000;
  EXPECT_THROW(Generate(spec), ValidationError);
  spec = SmallSpec();
  spec.trigger_second = spec.trigger_first;
  EXPECT_THROW(Generate(spec), ValidationError);
  spec = SmallSpec();
  spec.rule = "parity";
  EXPECT_THROW(Generate(spec), ValidationError);
}

TEST(CorpusFilesTest, RoundTripAndLabelErasure) {
  ScratchDir dir("corpus");
  const SyntheticTaskSpec spec = SmallSpec();
  const Corpus c = Generate(spec);
  SaveCorpus(c, spec, dir.path());
  const Corpus back = LoadCorpus(dir.path());
  ASSERT_EQ(back.labeled.size(), c.labeled.size());
  EXPECT_EQ(back.labeled[5].ids, c.labeled[5].ids);
  EXPECT_EQ(back.labeled[5].label, c.labeled[5].label);
  std::ifstream in(dir.path() / "unlabeled.jsonl");
  std::string line;
  size_t lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    EXPECT_FALSE(nlohmann::json::parse(line).contains("label"));
  }
  EXPECT_EQ(lines, c.unlabeled.size());
  const auto spec_doc =
      nlohmann::json::parse(std::ifstream(dir.path() / "corpus_spec.json"));
  EXPECT_EQ(TaskSpecFromJson(spec_doc).rng_seed, spec.rng_seed);
  EXPECT_THROW(LoadExamples(dir.path() / "missing.jsonl"), DependencyError);
}

TEST(TrainTeacherTest, ZeroEpochsReturnsInitialization) {
  const Corpus c = Generate(SmallSpec());
  const ArchConfig config{.layers = 1, .hidden = 16, .heads = 2, .ffn = 32,
                          .vocab = 2000, .max_seq_len = 32, .num_classes = 2};
  TeacherParams params;
  params.epochs = 0;
  const TeacherResult r = TrainTeacher(config, c.labeled, c.val, params);
  EXPECT_EQ(r.model, EncoderModel::Init(config, params.rng_seed));
  EXPECT_EQ(r.epochs_run, 0);
  EXPECT_TRUE(r.loss_trace.empty());
}

TEST(TrainTeacherTest, SmallModelLearnsWithoutLeak) {
  const Corpus c = Generate(SmallSpec());
  const ArchConfig config{.layers = 1, .hidden = 32, .heads = 2, .ffn = 64,
                          .vocab = 2000, .max_seq_len = 32, .num_classes = 2};
  TeacherParams params;
  params.epochs = 4;
  params.learning_rate = 2e-3;
  const TeacherResult r = TrainTeacher(config, c.labeled, c.val, params);
  EXPECT_EQ(r.epochs_run, 4);
  EXPECT_LT(r.loss_trace.back(), r.loss_trace.front());
  EXPECT_GE(r.train_accuracy, r.val_accuracy - 0.10);
  const TeacherResult again = TrainTeacher(config, c.labeled, c.val, params);
  EXPECT_EQ(again.model, r.model);
  EXPECT_EQ(again.loss_trace, r.loss_trace);
}

TEST(TrainTeacherTest, RejectsUnlabeledInput) {
  const Corpus c = Generate(SmallSpec());
  const ArchConfig config{.layers = 1, .hidden = 16, .heads = 2, .ffn = 32,
                          .vocab = 2000, .max_seq_len = 32, .num_classes = 2};
  EXPECT_THROW(TrainTeacher(config, c.unlabeled, c.val, TeacherParams{}),
               ValidationError);
  EXPECT_THROW(TrainTeacher(config, {}, c.val, TeacherParams{}), ValidationError);
  EXPECT_THROW(LabelAccuracy(EncoderModel::Init(config, 0), {}), ValidationError);
}

}  // namespace
}  // namespace gacompress
