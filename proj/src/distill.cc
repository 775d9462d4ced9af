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

#include "gacompress/distill.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <utility>

#include "gacompress/errors.h"
#include "gacompress/training.h"

namespace gacompress {

namespace {

constexpr int kLogitFormatVersion = 1;

Eigen::VectorXd LogSoftmax(const Eigen::VectorXd& z) {
  const double mx = z.maxCoeff();
  const double lse = mx + std::log((z.array() - mx).exp().sum());
  return z.array() - lse;
}

Eigen::VectorXd AsVector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

class SoftTargetSource : public ExampleSource {
 public:
  SoftTargetSource(const LogitDataset& data, double temperature,
                   const VocabMap& map)
      : temperature_(temperature) {
    mapped_.reserve(data.records.size());
    targets_.reserve(data.records.size());
    for (const LogitRecord& r : data.records) {
      mapped_.push_back(map.Apply(r.ids));
      targets_.push_back(AsVector(r.logits));
    }
  }
  size_t size() const override { return mapped_.size(); }
  std::span<const int32_t> ids(size_t i) const override { return mapped_[i]; }
  double LossAndGrad(size_t i, const Eigen::VectorXd& logits,
                     Eigen::VectorXd& dlogits) const override {
    return SoftCeLoss(targets_[i], logits, temperature_, &dlogits);
  }

 private:
  double temperature_;
  std::vector<TokenSeq> mapped_;
  std::vector<Eigen::VectorXd> targets_;
};

}  // namespace

LogitDataset CaptureTeacherLogits(const EncoderModel& teacher,
                                  const std::vector<TokenSeq>& unlabeled,
                                  bool strict, CaptureReport* report) {
  LogitDataset data;
  data.num_classes = teacher.config().num_classes;
  data.teacher_vocab = teacher.config().vocab;
  data.records.reserve(unlabeled.size());
  CaptureReport local;
  for (size_t i = 0; i < unlabeled.size(); ++i) {
    try {
      CheckTokens(teacher.config(), unlabeled[i]);
    } catch (const ValidationError& e) {
      if (strict) {
        throw ValidationError("sequence " + std::to_string(i) + ": " +
                              e.what());
      }
      ++local.skipped;
      local.problems.push_back("sequence " + std::to_string(i) + ": " +
                               e.what());
      continue;
    }
    const Eigen::VectorXd logits = Forward(teacher, unlabeled[i]);
    data.records.push_back(
        LogitRecord{unlabeled[i], std::vector<double>(logits.begin(),
                                                      logits.end())});
    ++local.captured;
  }
  if (report) *report = std::move(local);
  return data;
}

void SaveLogitDataset(const LogitDataset& data,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DependencyError("cannot open " + path.string());
  out << nlohmann::json{{"version", kLogitFormatVersion},
                        {"num_classes", data.num_classes},
                        {"count", data.records.size()},
                        {"teacher_vocab", data.teacher_vocab}}
             .dump()
      << '\n';
  for (const LogitRecord& r : data.records) {
    out << nlohmann::json{{"ids", r.ids}, {"logits", r.logits}}.dump() << '\n';
  }
  if (!out) throw DependencyError("failed writing " + path.string());
}

LogitDataset LoadLogitDataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DependencyError("logit dataset not found: " + path.string());
  LogitDataset data;
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError(path.string() + ": missing header line");
  }
  size_t expected = 0;
  try {
    const auto header = nlohmann::json::parse(line);
    if (header.at("version").get<int>() != kLogitFormatVersion) {
      throw ValidationError(path.string() + ": unsupported version");
    }
    data.num_classes = header.at("num_classes").get<int64_t>();
    expected = header.at("count").get<size_t>();
    data.teacher_vocab = header.value("teacher_vocab", int64_t{0});
    size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto rec = nlohmann::json::parse(line);
      LogitRecord r{rec.at("ids").get<TokenSeq>(),
                    rec.at("logits").get<std::vector<double>>()};
      if (static_cast<int64_t>(r.logits.size()) != data.num_classes) {
        throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                              ": logits length does not match num_classes");
      }
      data.records.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  if (data.records.size() != expected) {
    throw ValidationError(path.string() + ": header count " +
                          std::to_string(expected) + " but found " +
                          std::to_string(data.records.size()) + " records");
  }
  if (data.teacher_vocab == 0) {
    for (const auto& r : data.records) {
      for (int32_t id : r.ids) {
        data.teacher_vocab = std::max<int64_t>(data.teacher_vocab, id + 1);
      }
    }
  }
  return data;
}

double SoftCeLoss(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                  double temperature, Eigen::VectorXd* dq) {
  if (p.size() != q.size()) {
    throw ValidationError("soft cross-entropy needs equal-length logits");
  }
  if (!(temperature > 0.0)) throw ValidationError("temperature must be > 0");
  const Eigen::VectorXd target = Softmax(p / temperature);
  const Eigen::VectorXd log_q = LogSoftmax(q / temperature);
  const double t2 = temperature * temperature;
  const double loss = -t2 * target.dot(log_q);
  if (dq) *dq = temperature * (log_q.array().exp().matrix() - target);
  // Cross-entropy is never below zero; clamp the rounding residue.
  return std::max(loss, 0.0);
}

VocabMap VocabMap::Identity(int64_t vocab) {
  VocabMap m;
  m.student_vocab_ = vocab;
  return m;
}

VocabMap VocabMap::FromFrequencies(const std::vector<LogitRecord>& records,
                                   int64_t teacher_vocab,
                                   int64_t student_vocab) {
  if (student_vocab < 1) throw ValidationError("student vocab must be >= 1");
  if (student_vocab >= teacher_vocab) return Identity(student_vocab);
  std::vector<int64_t> counts(teacher_vocab, 0);
  for (const auto& r : records) {
    for (int32_t id : r.ids) {
      if (id < 0 || id >= teacher_vocab) {
        throw ValidationError("token id outside the teacher vocabulary");
      }
      ++counts[id];
    }
  }
  std::vector<int32_t> order(teacher_vocab);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int32_t a, int32_t b) {
    return counts[a] > counts[b];
  });
  VocabMap m;
  m.student_vocab_ = student_vocab;
  m.table_.assign(teacher_vocab, kUnknownToken);
  for (int64_t rank = 0; rank < student_vocab - 1; ++rank) {
    m.table_[order[rank]] = static_cast<int32_t>(rank + 1);
  }
  return m;
}

int32_t VocabMap::Map(int32_t teacher_id) const {
  if (table_.empty()) return teacher_id;
  if (teacher_id < 0 || static_cast<size_t>(teacher_id) >= table_.size()) {
    return kUnknownToken;
  }
  return table_[teacher_id];
}

TokenSeq VocabMap::Apply(std::span<const int32_t> ids) const {
  TokenSeq out(ids.begin(), ids.end());
  if (!table_.empty()) {
    for (int32_t& id : out) id = Map(id);
  }
  return out;
}

nlohmann::json VocabMap::ToJson() const {
  return nlohmann::json{{"student_vocab", student_vocab_},
                        {"identity", table_.empty()},
                        {"table", table_}};
}

VocabMap VocabMap::FromJson(const nlohmann::json& doc) {
  try {
    VocabMap m;
    m.student_vocab_ = doc.at("student_vocab").get<int64_t>();
    if (!doc.at("identity").get<bool>()) {
      m.table_ = doc.at("table").get<std::vector<int32_t>>();
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad vocab map: ") + e.what());
  }
}

nlohmann::json ToJson(const DistillParams& p) {
  return nlohmann::json{{"temperature", p.temperature},
                        {"learning_rate", p.learning_rate},
                        {"epochs", p.epochs},
                        {"batch_size", p.batch_size},
                        {"rng_seed", p.rng_seed}};
}

double DistillLoss(const EncoderModel& student, const LogitDataset& data,
                   double temperature, const VocabMap& map,
                   std::span<double> grads) {
  SoftTargetSource source(data, temperature, map);
  return MeanLoss(student, source, grads);
}

double TeacherEntropyFloor(const LogitDataset& data, double temperature) {
  if (data.records.empty()) throw ValidationError("empty logit dataset");
  double total = 0.0;
  for (const auto& r : data.records) {
    const Eigen::VectorXd p = AsVector(r.logits);
    total += SoftCeLoss(p, p, temperature);
  }
  return total / static_cast<double>(data.records.size());
}

DistillResult DistillTrain(const ArchConfig& student_config,
                           const LogitDataset& data,
                           const DistillParams& params) {
  if (!(params.temperature > 0.0)) {
    throw ValidationError("temperature must be > 0");
  }
  if (params.batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (params.epochs < 0) throw ValidationError("epochs must be >= 0");
  if (data.records.empty()) throw ValidationError("empty logit dataset");
  if (data.num_classes != student_config.num_classes) {
    throw ValidationError("student num_classes does not match the teacher");
  }
  VocabMap map = params.vocab_map
                     ? *params.vocab_map
                     : VocabMap::FromFrequencies(data.records,
                                                 data.teacher_vocab,
                                                 student_config.vocab);
  SoftTargetSource source(data, params.temperature, map);
  for (size_t i = 0; i < source.size(); ++i) {
    CheckTokens(student_config, source.ids(i));
  }

  TrainState state(EncoderModel::Init(student_config, params.rng_seed),
                   params.rng_seed);
  std::mt19937_64 rng(params.rng_seed ^ 0x5851f42d4c957f2dULL);
  DistillResult result{
      .student = state.model, .vocab_map = map, .loss_trace = {}};
  result.loss_trace.push_back(MeanLoss(state.model, source));
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    TrainEpoch(state, source, params.batch_size, params.learning_rate, rng);
    const double loss = MeanLoss(state.model, source);
    if (!std::isfinite(loss)) {
      throw NumericalError("distillation diverged after epoch " +
                           std::to_string(epoch + 1));
    }
    result.loss_trace.push_back(loss);
  }
  result.student = std::move(state.model);
  return result;
}

double Agreement(const EncoderModel& student, std::span<const int> reference,
                 const std::vector<TokenSeq>& eval_set, const VocabMap& map) {
  if (eval_set.empty()) {
    throw ValidationError("agreement is undefined on an empty set");
  }
  if (reference.size() != eval_set.size()) {
    throw ValidationError("reference labels do not match the eval set");
  }
  size_t hits = 0;
  for (size_t i = 0; i < eval_set.size(); ++i) {
    if (ArgMax(Forward(student, map.Apply(eval_set[i]))) == reference[i]) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(eval_set.size());
}

double LabelAgreement(const EncoderModel& student,
                      const std::vector<Example>& labeled,
                      const VocabMap& map) {
  std::vector<TokenSeq> seqs;
  std::vector<int> labels;
  seqs.reserve(labeled.size());
  labels.reserve(labeled.size());
  for (const Example& ex : labeled) {
    seqs.push_back(ex.ids);
    labels.push_back(ex.label);
  }
  return Agreement(student, labels, seqs, map);
}

double TeacherAgreement(const EncoderModel& student,
                        const EncoderModel& teacher,
                        const std::vector<TokenSeq>& eval_set,
                        const VocabMap& map) {
  std::vector<int> labels;
  labels.reserve(eval_set.size());
  for (const TokenSeq& ids : eval_set) {
    labels.push_back(ArgMax(Forward(teacher, ids)));
  }
  return Agreement(student, labels, eval_set, map);
}

}  // namespace gacompress
