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

// Knowledge distillation from captured teacher logits.
//
// The teacher is queried once on unlabeled sequences and its raw logits are
// stored. The student minimizes the temperature-softened soft cross-entropy
//
//   loss(p, q) = -T^2 * sum_c softmax(p / T)_c * log softmax(q / T)_c
//
// averaged over the dataset, where p are teacher logits (constant) and q are
// student logits.

#ifndef GACOMPRESS_DISTILL_H_
#define GACOMPRESS_DISTILL_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gacompress/corpus.h"
#include "gacompress/nn.h"
#include "json.hpp"

namespace gacompress {

struct LogitRecord {
  TokenSeq ids;
  std::vector<double> logits;
};

struct LogitDataset {
  int64_t num_classes = 0;
  int64_t teacher_vocab = 0;
  std::vector<LogitRecord> records;
};

struct CaptureReport {
  size_t captured = 0;
  size_t skipped = 0;
  std::vector<std::string> problems;
};

// Runs the teacher on every sequence and keeps its pre-softmax logits. With
// `strict` an invalid sequence throws ValidationError; otherwise it is
// skipped and listed in `report`.
LogitDataset CaptureTeacherLogits(const EncoderModel& teacher,
                                  const std::vector<TokenSeq>& unlabeled,
                                  bool strict = true,
                                  CaptureReport* report = nullptr);

// Text format: a header line {"version":1,"num_classes":C,"count":n,
// "teacher_vocab":V} followed by one {"ids":[...],"logits":[...]} per line.
void SaveLogitDataset(const LogitDataset& data,
                      const std::filesystem::path& path);
LogitDataset LoadLogitDataset(const std::filesystem::path& path);

// Soft cross-entropy for one record. When `dq` is given it receives
// d(loss)/d(q) = T * (softmax(q/T) - softmax(p/T)).
double SoftCeLoss(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                  double temperature, Eigen::VectorXd* dq = nullptr);

// Teacher-to-student token id map for a student with a smaller vocabulary.
// The student_vocab - 1 most frequent teacher ids (ties to the smaller id)
// map to 1..student_vocab-1 in frequency order; everything else maps to 0.
class VocabMap {
 public:
  VocabMap() = default;
  static VocabMap Identity(int64_t vocab);
  static VocabMap FromFrequencies(const std::vector<LogitRecord>& records,
                                  int64_t teacher_vocab, int64_t student_vocab);

  bool is_identity() const { return table_.empty(); }
  int64_t student_vocab() const { return student_vocab_; }
  int32_t Map(int32_t teacher_id) const;
  TokenSeq Apply(std::span<const int32_t> ids) const;

  nlohmann::json ToJson() const;
  static VocabMap FromJson(const nlohmann::json& doc);

 private:
  std::vector<int32_t> table_;  // empty means identity
  int64_t student_vocab_ = 0;
};

struct DistillParams {
  double temperature = 2.0;
  double learning_rate = 1e-3;
  int epochs = 20;
  int batch_size = 32;
  uint64_t rng_seed = 0;
  std::optional<VocabMap> vocab_map;
};

nlohmann::json ToJson(const DistillParams& params);

struct DistillResult {
  EncoderModel student;
  VocabMap vocab_map;
  // Mean dataset loss before training, then after every epoch.
  std::vector<double> loss_trace;
};

// Mean soft cross-entropy of `student` over `data`; accumulates the gradient
// of that mean into `grads` when it is non-empty.
double DistillLoss(const EncoderModel& student, const LogitDataset& data,
                   double temperature, const VocabMap& map,
                   std::span<double> grads = {});

// Mean over records of T^2 * H(softmax(p/T)), the lowest reachable loss.
double TeacherEntropyFloor(const LogitDataset& data, double temperature);

DistillResult DistillTrain(const ArchConfig& student_config,
                           const LogitDataset& data,
                           const DistillParams& params);

// Fraction of `eval_set` on which argmax of the student equals `reference`.
// Sequences are passed through `map` first. Throws on an empty set.
double Agreement(const EncoderModel& student, std::span<const int> reference,
                 const std::vector<TokenSeq>& eval_set, const VocabMap& map);

double LabelAgreement(const EncoderModel& student,
                      const std::vector<Example>& labeled,
                      const VocabMap& map);

double TeacherAgreement(const EncoderModel& student,
                        const EncoderModel& teacher,
                        const std::vector<TokenSeq>& eval_set,
                        const VocabMap& map);

}  // namespace gacompress

#endif  // GACOMPRESS_DISTILL_H_
