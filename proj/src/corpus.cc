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

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <utility>

#include "gacompress/errors.h"
#include "gacompress/training.h"

namespace gacompress {

namespace {

constexpr int kMaxBalanceAttempts = 100;
constexpr int kMaxDuplicateRetries = 1000;

class BigramGenerator {
 public:
  BigramGenerator(const SyntheticTaskSpec& spec, std::mt19937_64& rng)
      : spec_(spec), rng_(rng) {}

  Example Make() {
    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<int> length(spec_.min_len, spec_.max_len);
    std::uniform_int_distribution<int32_t> filler(2, spec_.vocab_size - 1);
    Example ex;
    ex.label = coin(rng_) ? 1 : 0;
    const int n = length(rng_);
    ex.ids.assign(n, kClsToken);
    for (int i = 1; i < n; ++i) {
      int32_t t;
      do {
        t = filler(rng_);
      } while (t == spec_.trigger_first || t == spec_.trigger_second);
      ex.ids[i] = t;
    }
    if (ex.label == 1) {
      std::uniform_int_distribution<int> at(1, n - 2);
      const int p = at(rng_);
      ex.ids[p] = spec_.trigger_first;
      ex.ids[p + 1] = spec_.trigger_second;
    } else {
      std::uniform_int_distribution<int> kind(0, 2);
      std::uniform_int_distribution<int> at(1, n - 1);
      switch (kind(rng_)) {
        case 1:
          ex.ids[at(rng_)] = spec_.trigger_first;
          break;
        case 2:
          ex.ids[at(rng_)] = spec_.trigger_second;
          break;
        default:
          break;
      }
    }
    return ex;
  }

 private:
  const SyntheticTaskSpec& spec_;
  std::mt19937_64& rng_;
};

std::vector<Example> MakeSplit(int size, const char* name, BigramGenerator& gen,
                               std::set<TokenSeq>& seen) {
  if (size == 0) return {};
  for (int attempt = 0; attempt < kMaxBalanceAttempts; ++attempt) {
    std::vector<Example> split;
    std::set<TokenSeq> local;
    split.reserve(size);
    int positives = 0;
    while (static_cast<int>(split.size()) < size) {
      Example ex = gen.Make();
      int retries = 0;
      while (seen.count(ex.ids) || local.count(ex.ids)) {
        if (++retries > kMaxDuplicateRetries) {
          throw ValidationError(std::string("cannot draw enough distinct "
                                            "sequences for split ") +
                                name);
        }
        ex = gen.Make();
      }
      local.insert(ex.ids);
      positives += ex.label;
      split.push_back(std::move(ex));
    }
    const double rate = static_cast<double>(positives) / size;
    if (rate >= 0.45 && rate <= 0.55) {
      seen.insert(local.begin(), local.end());
      return split;
    }
  }
  throw ValidationError(std::string("split ") + name +
                        " could not reach a 45-55% class balance");
}

class LabeledSource : public ExampleSource {
 public:
  explicit LabeledSource(const std::vector<Example>& examples)
      : examples_(examples) {}
  size_t size() const override { return examples_.size(); }
  std::span<const int32_t> ids(size_t i) const override {
    return examples_[i].ids;
  }
  double LossAndGrad(size_t i, const Eigen::VectorXd& logits,
                     Eigen::VectorXd& dlogits) const override {
    const int y = examples_[i].label;
    dlogits = Softmax(logits);
    const double mx = logits.maxCoeff();
    const double lse = mx + std::log((logits.array() - mx).exp().sum());
    dlogits[y] -= 1.0;
    return lse - logits[y];
  }

 private:
  const std::vector<Example>& examples_;
};

}  // namespace

void CheckTaskSpec(const SyntheticTaskSpec& s) {
  if (s.rule != "bigram") {
    throw ValidationError("unknown class rule: " + s.rule);
  }
  if (s.vocab_size < 5) throw ValidationError("vocab_size must be >= 5");
  if (s.min_len < 3 || s.max_len < s.min_len) {
    throw ValidationError("need 3 <= min_len <= max_len");
  }
  auto trigger_ok = [&](int32_t t) { return t >= 2 && t < s.vocab_size; };
  if (!trigger_ok(s.trigger_first) || !trigger_ok(s.trigger_second) ||
      s.trigger_first == s.trigger_second) {
    throw ValidationError("trigger tokens must be distinct ids in [2, vocab)");
  }
  if (s.labeled < 0 || s.unlabeled < 0 || s.val < 0 || s.test < 0) {
    throw ValidationError("split sizes must be non-negative");
  }
}

Corpus Generate(const SyntheticTaskSpec& spec) {
  CheckTaskSpec(spec);
  std::mt19937_64 rng(spec.rng_seed);
  BigramGenerator gen(spec, rng);
  std::set<TokenSeq> seen;
  Corpus corpus;
  corpus.labeled = MakeSplit(spec.labeled, "labeled", gen, seen);
  corpus.unlabeled = MakeSplit(spec.unlabeled, "unlabeled", gen, seen);
  for (Example& ex : corpus.unlabeled) ex.label = -1;
  corpus.val = MakeSplit(spec.val, "val", gen, seen);
  corpus.test = MakeSplit(spec.test, "test", gen, seen);
  return corpus;
}

nlohmann::json ToJson(const SyntheticTaskSpec& s) {
  return nlohmann::json{{"vocab_size", s.vocab_size},
                        {"min_len", s.min_len},
                        {"max_len", s.max_len},
                        {"rule", s.rule},
                        {"trigger_first", s.trigger_first},
                        {"trigger_second", s.trigger_second},
                        {"labeled", s.labeled},
                        {"unlabeled", s.unlabeled},
                        {"val", s.val},
                        {"test", s.test},
                        {"rng_seed", s.rng_seed}};
}

SyntheticTaskSpec TaskSpecFromJson(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("task spec must be an object");
  SyntheticTaskSpec s;
  try {
    s.vocab_size = doc.value("vocab_size", s.vocab_size);
    s.min_len = doc.value("min_len", s.min_len);
    s.max_len = doc.value("max_len", s.max_len);
    s.rule = doc.value("rule", s.rule);
    s.trigger_first = doc.value("trigger_first", s.trigger_first);
    s.trigger_second = doc.value("trigger_second", s.trigger_second);
    s.labeled = doc.value("labeled", s.labeled);
    s.unlabeled = doc.value("unlabeled", s.unlabeled);
    s.val = doc.value("val", s.val);
    s.test = doc.value("test", s.test);
    s.rng_seed = doc.value("rng_seed", s.rng_seed);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad task spec: ") + e.what());
  }
  CheckTaskSpec(s);
  return s;
}

void SaveExamples(const std::vector<Example>& examples,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DependencyError("cannot open " + path.string());
  for (const Example& ex : examples) {
    nlohmann::json rec{{"ids", ex.ids}};
    if (ex.label >= 0) rec["label"] = ex.label;
    out << rec.dump() << '\n';
  }
}

std::vector<Example> LoadExamples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DependencyError("corpus file not found: " + path.string());
  std::vector<Example> examples;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto rec = nlohmann::json::parse(line);
      Example ex;
      ex.ids = rec.at("ids").get<TokenSeq>();
      ex.label = rec.contains("label") ? rec.at("label").get<int>() : -1;
      examples.push_back(std::move(ex));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": " + e.what());
    }
  }
  return examples;
}

void SaveCorpus(const Corpus& corpus, const SyntheticTaskSpec& spec,
                const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "corpus_spec.json") << ToJson(spec).dump(2) << '\n';
  SaveExamples(corpus.labeled, dir / "labeled.jsonl");
  SaveExamples(corpus.unlabeled, dir / "unlabeled.jsonl");
  SaveExamples(corpus.val, dir / "val.jsonl");
  SaveExamples(corpus.test, dir / "test.jsonl");
}

Corpus LoadCorpus(const std::filesystem::path& dir) {
  Corpus corpus;
  corpus.labeled = LoadExamples(dir / "labeled.jsonl");
  corpus.unlabeled = LoadExamples(dir / "unlabeled.jsonl");
  corpus.val = LoadExamples(dir / "val.jsonl");
  corpus.test = LoadExamples(dir / "test.jsonl");
  return corpus;
}

double LabelAccuracy(const EncoderModel& model,
                     const std::vector<Example>& examples) {
  if (examples.empty()) {
    throw ValidationError("accuracy is undefined on an empty set");
  }
  size_t hits = 0;
  for (const Example& ex : examples) {
    if (ArgMax(Forward(model, ex.ids)) == ex.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(examples.size());
}

TeacherResult TrainTeacher(const ArchConfig& config,
                           const std::vector<Example>& labeled,
                           const std::vector<Example>& val,
                           const TeacherParams& params) {
  if (labeled.empty()) throw ValidationError("labeled split is empty");
  if (params.epochs < 0) throw ValidationError("epochs must be >= 0");
  for (const Example& ex : labeled) {
    if (ex.label < 0 || ex.label >= config.num_classes) {
      throw ValidationError("labeled split contains an unlabeled example");
    }
    CheckTokens(config, ex.ids);
  }
  TrainState state(EncoderModel::Init(config, params.rng_seed),
                   params.rng_seed);
  std::mt19937_64 rng(params.rng_seed ^ 0x9e3779b97f4a7c15ULL);
  LabeledSource source(labeled);
  TeacherResult result{.model = state.model, .loss_trace = {}, .val_trace = {}};
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    result.loss_trace.push_back(TrainEpoch(state, source, params.batch_size,
                                           params.learning_rate, rng));
    ++result.epochs_run;
    if (!val.empty()) {
      result.val_trace.push_back(LabelAccuracy(state.model, val));
      if (result.val_trace.back() >= params.stop_at_val_accuracy) break;
    }
  }
  result.model = state.model;
  result.val_accuracy = val.empty() ? 0.0
                        : result.val_trace.empty()
                            ? LabelAccuracy(result.model, val)
                            : result.val_trace.back();
  result.train_accuracy = LabelAccuracy(result.model, labeled);
  return result;
}

}  // namespace gacompress
