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

// Synthetic binary sequence classification task and teacher training.
//
// Every sequence starts with kClsToken. Label 1 iff the trigger bigram
// (trigger_first, trigger_second) occurs at adjacent positions. Negatives
// carry none, one or the other trigger token alone so that token presence
// by itself does not decide the label.

#ifndef GACOMPRESS_CORPUS_H_
#define GACOMPRESS_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gacompress/nn.h"
#include "json.hpp"

namespace gacompress {

inline constexpr int32_t kUnknownToken = 0;
inline constexpr int32_t kClsToken = 1;

struct Example {
  TokenSeq ids;
  int label = -1;  // -1 once erased
};

struct SyntheticTaskSpec {
  int32_t vocab_size = 2000;
  int min_len = 12;  // including the leading CLS token
  int max_len = 24;
  std::string rule = "bigram";
  int32_t trigger_first = 17;
  int32_t trigger_second = 42;
  int labeled = 4000;
  int unlabeled = 4000;
  int val = 1000;
  int test = 1000;
  uint64_t rng_seed = 7;
};

struct Corpus {
  std::vector<Example> labeled;
  std::vector<Example> unlabeled;  // labels erased
  std::vector<Example> val;
  std::vector<Example> test;
};

void CheckTaskSpec(const SyntheticTaskSpec& spec);

// Deterministic by seed; every sequence is unique across all four splits and
// each non-empty split has a positive rate within [0.45, 0.55]. Throws
// ValidationError when balance cannot be reached after bounded resampling.
Corpus Generate(const SyntheticTaskSpec& spec);

nlohmann::json ToJson(const SyntheticTaskSpec& spec);
SyntheticTaskSpec TaskSpecFromJson(const nlohmann::json& doc);

// One {"ids": [...], "label": k} object per line; unlabeled records carry no
// label key.
void SaveExamples(const std::vector<Example>& examples,
                  const std::filesystem::path& path);
std::vector<Example> LoadExamples(const std::filesystem::path& path);

// Writes corpus_spec.json and {labeled,unlabeled,val,test}.jsonl into `dir`.
void SaveCorpus(const Corpus& corpus, const SyntheticTaskSpec& spec,
                const std::filesystem::path& dir);
Corpus LoadCorpus(const std::filesystem::path& dir);

struct TeacherParams {
  int epochs = 10;
  int batch_size = 32;
  double learning_rate = 5e-4;
  uint64_t rng_seed = 11;
  // Stop after the first epoch whose validation accuracy reaches this value.
  // Values above 1 never trigger.
  double stop_at_val_accuracy = 2.0;
};

struct TeacherResult {
  EncoderModel model;
  double val_accuracy = 0.0;
  double train_accuracy = 0.0;
  int epochs_run = 0;
  std::vector<double> loss_trace;  // mean training loss per epoch
  std::vector<double> val_trace;   // validation accuracy per epoch
};

// Supervised cross-entropy training from N(0, 0.02) initialization.
TeacherResult TrainTeacher(const ArchConfig& config,
                           const std::vector<Example>& labeled,
                           const std::vector<Example>& val,
                           const TeacherParams& params);

// Fraction of examples whose argmax prediction equals their label.
double LabelAccuracy(const EncoderModel& model,
                     const std::vector<Example>& examples);

}  // namespace gacompress

#endif  // GACOMPRESS_CORPUS_H_
