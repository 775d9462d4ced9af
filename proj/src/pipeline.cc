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

#include "gacompress/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <utility>

#include "gacompress/checkpoint.h"
#include "gacompress/errors.h"
#include "gacompress/estimators.h"

namespace gacompress {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void RequireFile(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path)) {
    throw DependencyError("missing " + path.string() + "; run `gacompress " +
                          producer + "` first");
  }
}

std::vector<TokenSeq> Sequences(const std::vector<Example>& examples) {
  std::vector<TokenSeq> out;
  out.reserve(examples.size());
  for (const Example& ex : examples) out.push_back(ex.ids);
  return out;
}

// Fits a sequence to a model: truncation to the allowed length, the student
// vocabulary map when it applies, and unknown-token fallback otherwise.
TokenSeq AdaptForModel(const TokenSeq& ids, const ArchConfig& arch,
                       const VocabMap* map, int64_t seq_len) {
  int64_t limit = arch.max_seq_len;
  if (seq_len > 0) limit = std::min(limit, seq_len);
  TokenSeq out(ids.begin(),
               ids.begin() + std::min<int64_t>(limit, ids.size()));
  if (map && !map->is_identity() && map->student_vocab() == arch.vocab) {
    out = map->Apply(out);
  }
  for (int32_t& id : out) {
    if (id < 0 || id >= arch.vocab) id = kUnknownToken;
  }
  return out;
}

}  // namespace

nlohmann::json RunReport::ToJson() const {
  return nlohmann::json{{"command", command},     {"config", config},
                        {"seed", seed},           {"metrics", metrics},
                        {"wall_seconds", wall_seconds},
                        {"artifacts", artifacts}};
}

void CheckFinite(const nlohmann::json& doc, const std::string& where) {
  if (doc.is_number_float()) {
    if (!std::isfinite(doc.get<double>())) {
      throw NumericalError("non-finite value at " +
                           (where.empty() ? std::string("/") : where));
    }
  } else if (doc.is_object()) {
    for (const auto& [key, value] : doc.items()) {
      CheckFinite(value, where + "/" + key);
    }
  } else if (doc.is_array()) {
    for (size_t i = 0; i < doc.size(); ++i) {
      CheckFinite(doc[i], where + "/" + std::to_string(i));
    }
  }
}

nlohmann::json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DependencyError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void WriteJsonFile(const nlohmann::json& doc, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DependencyError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

void SaveRunReport(const RunReport& report, const fs::path& out) {
  const nlohmann::json doc = report.ToJson();
  CheckFinite(doc);
  WriteJsonFile(doc, out / (report.command + "_report.json"));
}

RunReport RunEstimate(const EstimateOptions& o) {
  const auto start = Clock::now();
  if (auto v = ValidateBasic(o.config)) {
    throw ValidationError(std::string(RuleName(v->rule)) + ": " + v->message);
  }
  if (o.check_table1) {
    if (auto v = Validate(o.config, SearchSpace::DefaultTable1())) {
      throw ValidationError(std::string(RuleName(v->rule)) + ": " +
                            v->message);
    }
  }
  const int64_t seq_len =
      o.seq_len.value_or(std::min<int64_t>(400, o.config.max_seq_len));
  RunReport report;
  report.command = "estimate";
  report.config = {{"arch", ToJson(o.config)},
                   {"seq_len", seq_len},
                   {"bytes_per_param", o.bytes_per_param},
                   {"space", o.check_table1 ? "table1" : "none"}};
  report.metrics = EstimateJson(ModelSize(o.config, o.bytes_per_param),
                                ForwardFlops(o.config, seq_len));
  report.wall_seconds = SecondsSince(start);
  return report;
}

RunReport RunSearch(const SearchOptions& o) {
  const auto start = Clock::now();
  GaParams ga = o.ga;
  nlohmann::json budget = {{"mode", "absolute"}};
  if (o.target_fraction) {
    if (!(*o.target_fraction > 0.0)) {
      throw ValidationError("target fraction must be > 0");
    }
    const fs::path ckpt =
        o.teacher_checkpoint.value_or(o.out_dir / files::kTeacherCkpt);
    RequireFile(ckpt, "teach");
    const ArchConfig teacher = LoadCheckpoint(ckpt).config();
    const double teacher_mb = ModelSize(teacher).megabytes;
    ga.target_size_mb = *o.target_fraction * teacher_mb;
    ga.context = ArchContext{teacher.max_seq_len, teacher.num_classes};
    ga.fitness_seq_len = std::min(ga.fitness_seq_len, teacher.max_seq_len);
    budget = {{"mode", "fraction_of_teacher"},
              {"fraction", *o.target_fraction},
              {"teacher_mb", teacher_mb},
              {"teacher_checkpoint", ckpt.string()}};
  }
  CheckGaParams(ga);
  const GaResult result = Search(SearchSpace::DefaultTable1(), ga);
  const nlohmann::json result_doc = ToJson(result, ga);
  const ArchConfig best = ToArch(result.best, ga.context);

  fs::create_directories(o.out_dir);
  WriteJsonFile(result_doc, o.out_dir / files::kGaResult);
  WriteJsonFile(ToJson(best), o.out_dir / files::kArch);

  RunReport report;
  report.command = "search";
  report.config = {{"ga", ToJson(ga)}, {"budget", budget}};
  report.seed = ga.rng_seed;
  report.metrics = {{"best", ToJson(best)},
                    {"best_fitness", result.best_fitness},
                    {"size_mb", result_doc["size_mb"]},
                    {"gflops", result_doc["gflops"]},
                    {"target_size_mb", ga.target_size_mb},
                    {"evaluations", result.evaluations},
                    {"elapsed_seconds", result.elapsed_seconds},
                    {"history", result.history}};
  report.artifacts = {
      {"ga_result", (o.out_dir / files::kGaResult).string()},
      {"arch", (o.out_dir / files::kArch).string()}};
  report.wall_seconds = SecondsSince(start);
  SaveRunReport(report, o.out_dir);
  return report;
}

RunReport RunTeach(const TeachOptions& o) {
  const auto start = Clock::now();
  if (auto v = ValidateBasic(o.teacher)) throw ValidationError(v->message);
  CheckTaskSpec(o.task);
  if (o.teacher.vocab < o.task.vocab_size) {
    throw ValidationError("teacher vocab is smaller than the task vocabulary");
  }
  if (o.teacher.max_seq_len < o.task.max_len) {
    throw ValidationError("teacher max_seq_len is shorter than task max_len");
  }
  const Corpus corpus = Generate(o.task);
  const fs::path corpus_dir = o.out_dir / files::kCorpusDir;
  SaveCorpus(corpus, o.task, corpus_dir);

  TeacherResult trained =
      TrainTeacher(o.teacher, corpus.labeled, corpus.val, o.training);
  const double test_accuracy = corpus.test.empty()
                                   ? 0.0
                                   : LabelAccuracy(trained.model, corpus.test);
  const fs::path ckpt = o.out_dir / files::kTeacherCkpt;
  SaveCheckpoint(trained.model, ckpt);

  RunReport report;
  report.command = "teach";
  report.config = {{"teacher", ToJson(o.teacher)},
                   {"task", ToJson(o.task)},
                   {"training",
                    {{"epochs", o.training.epochs},
                     {"batch_size", o.training.batch_size},
                     {"learning_rate", o.training.learning_rate},
                     {"rng_seed", o.training.rng_seed},
                     {"stop_at_val_accuracy", o.training.stop_at_val_accuracy}}}};
  report.seed = o.training.rng_seed;
  const SizeEstimate size = ModelSize(o.teacher);
  report.metrics = {{"val_accuracy", trained.val_accuracy},
                    {"train_accuracy", trained.train_accuracy},
                    {"test_accuracy", test_accuracy},
                    {"epochs_run", trained.epochs_run},
                    {"loss_trace", trained.loss_trace},
                    {"val_trace", trained.val_trace},
                    {"param_count", size.param_count},
                    {"size_mb", size.megabytes}};
  report.artifacts = {{"teacher", ckpt.string()},
                      {"corpus", corpus_dir.string()}};
  report.wall_seconds = SecondsSince(start);
  SaveRunReport(report, o.out_dir);
  return report;
}

RunReport RunCapture(const CaptureOptions& o) {
  const auto start = Clock::now();
  const fs::path ckpt = o.out_dir / files::kTeacherCkpt;
  const fs::path unlabeled_path =
      o.out_dir / files::kCorpusDir / "unlabeled.jsonl";
  RequireFile(ckpt, "teach");
  RequireFile(unlabeled_path, "teach");
  const EncoderModel teacher = LoadCheckpoint(ckpt);
  const std::vector<Example> unlabeled = LoadExamples(unlabeled_path);
  for (const Example& ex : unlabeled) {
    if (ex.label >= 0) {
      throw ValidationError("unlabeled split still carries labels");
    }
  }
  CaptureReport capture;
  const LogitDataset data =
      CaptureTeacherLogits(teacher, Sequences(unlabeled), o.strict, &capture);
  const fs::path out = o.out_dir / files::kLogits;
  SaveLogitDataset(data, out);

  RunReport report;
  report.command = "capture";
  report.config = {{"strict", o.strict}, {"teacher", ToJson(teacher.config())}};
  report.metrics = {{"captured", capture.captured},
                    {"skipped", capture.skipped},
                    {"problems", capture.problems}};
  report.artifacts = {{"logits", out.string()}};
  report.wall_seconds = SecondsSince(start);
  SaveRunReport(report, o.out_dir);
  return report;
}

RunReport RunDistill(const DistillOptions& o) {
  const auto start = Clock::now();
  const fs::path logits_path = o.out_dir / files::kLogits;
  const fs::path arch_path = o.student_arch.value_or(o.out_dir / files::kArch);
  RequireFile(logits_path, "capture");
  RequireFile(arch_path, "search");
  const LogitDataset data = LoadLogitDataset(logits_path);
  const ArchConfig student_arch = ArchConfigFromJson(ReadJsonFile(arch_path));

  DistillResult result = DistillTrain(student_arch, data, o.params);
  const fs::path ckpt = o.out_dir / files::kStudentCkpt;
  SaveCheckpoint(result.student, ckpt);
  WriteJsonFile(result.vocab_map.ToJson(), o.out_dir / files::kVocabMap);

  RunReport report;
  report.command = "distill";
  report.config = {{"student", ToJson(student_arch)},
                   {"distill", ToJson(o.params)},
                   {"vocab_map_identity", result.vocab_map.is_identity()}};
  report.seed = o.params.rng_seed;
  const SizeEstimate size = ModelSize(student_arch);
  nlohmann::json metrics = {
      {"loss_trace", result.loss_trace},
      {"initial_loss", result.loss_trace.front()},
      {"final_loss", result.loss_trace.back()},
      {"entropy_floor", TeacherEntropyFloor(data, o.params.temperature)},
      {"records", data.records.size()},
      {"param_count", size.param_count},
      {"size_mb", size.megabytes}};

  const fs::path test_path = o.out_dir / files::kCorpusDir / "test.jsonl";
  if (fs::exists(test_path)) {
    const std::vector<Example> test = LoadExamples(test_path);
    const double student_acc =
        LabelAgreement(result.student, test, result.vocab_map);
    metrics["student_test_accuracy"] = student_acc;
    const fs::path teacher_path = o.out_dir / files::kTeacherCkpt;
    if (fs::exists(teacher_path)) {
      const EncoderModel teacher = LoadCheckpoint(teacher_path);
      const double teacher_acc = LabelAccuracy(teacher, test);
      metrics["teacher_test_accuracy"] = teacher_acc;
      metrics["teacher_agreement"] = TeacherAgreement(
          result.student, teacher, Sequences(test), result.vocab_map);
      metrics["retention"] = teacher_acc > 0 ? student_acc / teacher_acc : 0.0;
      metrics["teacher_size_mb"] = ModelSize(teacher.config()).megabytes;
    }
  }
  report.metrics = std::move(metrics);
  report.artifacts = {{"student", ckpt.string()},
                      {"vocab_map", (o.out_dir / files::kVocabMap).string()}};
  report.wall_seconds = SecondsSince(start);
  SaveRunReport(report, o.out_dir);
  return report;
}

RunReport RunBench(const BenchOptions& o) {
  const auto start = Clock::now();
  if (o.examples < 1 || o.repeats < 1 || o.threads < 1 || o.seq_len < 0) {
    throw ValidationError("bench needs examples, repeats, threads >= 1");
  }
  Eigen::setNbThreads(o.threads);

  std::vector<fs::path> paths = o.checkpoints;
  if (paths.empty()) {
    paths = {o.out_dir / files::kTeacherCkpt, o.out_dir / files::kStudentCkpt};
  }
  std::vector<EncoderModel> models;
  for (const fs::path& p : paths) {
    RequireFile(p, p.filename() == files::kStudentCkpt ? "distill" : "teach");
    models.push_back(LoadCheckpoint(p));
  }
  std::optional<VocabMap> map;
  if (fs::exists(o.out_dir / files::kVocabMap)) {
    map = VocabMap::FromJson(ReadJsonFile(o.out_dir / files::kVocabMap));
  }

  std::mt19937_64 rng(o.seed);
  std::vector<TokenSeq> pool;
  const fs::path test_path = o.out_dir / files::kCorpusDir / "test.jsonl";
  if (fs::exists(test_path)) {
    pool = Sequences(LoadExamples(test_path));
  } else {
    int64_t vocab = models.front().config().vocab;
    int64_t len = models.front().config().max_seq_len;
    for (const auto& m : models) {
      vocab = std::min(vocab, m.config().vocab);
      len = std::min(len, m.config().max_seq_len);
    }
    if (o.seq_len > 0) len = std::min(len, o.seq_len);
    std::uniform_int_distribution<int32_t> token(0, vocab - 1);
    for (int i = 0; i < o.examples; ++i) {
      TokenSeq ids(len);
      for (auto& t : ids) t = token(rng);
      pool.push_back(std::move(ids));
    }
  }
  std::vector<size_t> order(pool.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min<size_t>(order.size(), o.examples));

  std::vector<std::vector<TokenSeq>> inputs(models.size());
  std::vector<double> mean_flops(models.size(), 0.0);
  for (size_t m = 0; m < models.size(); ++m) {
    const ArchConfig& arch = models[m].config();
    for (size_t i : order) {
      inputs[m].push_back(AdaptForModel(pool[i], arch, map ? &*map : nullptr,
                                        o.seq_len));
      mean_flops[m] += static_cast<double>(
          ForwardFlops(arch, static_cast<int64_t>(inputs[m].back().size()))
              .flops);
    }
    mean_flops[m] /= static_cast<double>(order.size());
  }

  // Warm-up so first-touch allocation does not land in repeat 0.
  for (size_t m = 0; m < models.size(); ++m) {
    for (size_t i = 0; i < std::min<size_t>(5, inputs[m].size()); ++i) {
      Forward(models[m], inputs[m][i]);
    }
  }

  std::vector<std::vector<double>> per_repeat(models.size());
  double sink = 0.0;
  for (int r = 0; r < o.repeats; ++r) {
    for (size_t m = 0; m < models.size(); ++m) {
      const auto t0 = Clock::now();
      for (const TokenSeq& ids : inputs[m]) sink += Forward(models[m], ids)[0];
      const double ms = 1e3 * SecondsSince(t0) /
                        static_cast<double>(inputs[m].size());
      per_repeat[m].push_back(ms);
    }
  }

  RunReport report;
  report.command = "bench";
  report.seed = o.seed;
  report.config = {{"examples", order.size()},
                   {"repeats", o.repeats},
                   {"seq_len", o.seq_len},
                   {"threads", o.threads}};
  nlohmann::json model_docs = nlohmann::json::array();
  std::vector<double> means;
  for (size_t m = 0; m < models.size(); ++m) {
    const double mean =
        std::accumulate(per_repeat[m].begin(), per_repeat[m].end(), 0.0) /
        static_cast<double>(per_repeat[m].size());
    means.push_back(mean);
    model_docs.push_back({{"checkpoint", paths[m].string()},
                          {"arch", ToJson(models[m].config())},
                          {"size_mb", ModelSize(models[m].config()).megabytes},
                          {"mean_flops", mean_flops[m]},
                          {"latency_ms_per_repeat", per_repeat[m]},
                          {"latency_ms_mean", mean}});
  }
  report.metrics = {{"models", model_docs}};
  if (models.size() == 2 && means[1] > 0.0 && means[0] > 0.0) {
    report.metrics["teacher_over_student"] = means[0] / means[1];
    report.metrics["student_over_teacher"] = means[1] / means[0];
    report.metrics["flops_ratio_student_over_teacher"] =
        mean_flops[1] / mean_flops[0];
  }
  report.metrics["checksum_finite"] = std::isfinite(sink);
  report.wall_seconds = SecondsSince(start);
  SaveRunReport(report, o.out_dir);
  return report;
}

RunReport RunReportMerge(const fs::path& out_dir) {
  const auto start = Clock::now();
  if (!fs::is_directory(out_dir)) {
    throw DependencyError("output directory not found: " + out_dir.string());
  }
  std::vector<fs::path> found;
  for (const auto& entry : fs::directory_iterator(out_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.ends_with("_report.json")) found.push_back(entry.path());
  }
  std::sort(found.begin(), found.end());
  if (found.empty()) {
    throw DependencyError("no command reports under " + out_dir.string());
  }
  nlohmann::json merged = nlohmann::json::object();
  for (const fs::path& p : found) {
    const nlohmann::json doc = ReadJsonFile(p);
    merged[doc.value("command", p.stem().string())] = doc;
  }
  RunReport report;
  report.command = "report";
  report.metrics = {{"reports", merged}};
  report.artifacts = {{"report", (out_dir / files::kReport).string()}};
  report.wall_seconds = SecondsSince(start);
  const nlohmann::json doc = report.ToJson();
  CheckFinite(doc);
  WriteJsonFile(doc, out_dir / files::kReport);
  return report;
}

}  // namespace gacompress
