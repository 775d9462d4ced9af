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

// gacompress: estimate, search, teach, capture, distill, bench, report.
//
// Every subcommand accepts --config FILE, a flat JSON object whose keys are
// the long flag names with '-' replaced by '_'. Flags given on the command
// line win over file values.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gacompress/errors.h"
#include "gacompress/pipeline.h"

namespace gacompress {
namespace {

namespace fs = std::filesystem;

// Resolves one setting: explicit flag, then config file key, then default.
template <typename T>
void Resolve(T& target, const std::optional<T>& flag,
             const nlohmann::json& file, const char* key) {
  if (flag) {
    target = *flag;
    return;
  }
  if (auto it = file.find(key); it != file.end()) {
    try {
      target = it->get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("config key ") + key + ": " +
                            e.what());
    }
  }
}

nlohmann::json LoadConfig(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  nlohmann::json doc = ReadJsonFile(path);
  if (!doc.is_object()) throw ValidationError(path + " is not a flat object");
  return doc;
}

struct ArchFlags {
  std::optional<int64_t> layers, hidden, heads, ffn, vocab, max_seq_len,
      num_classes;

  void Register(CLI::App* app) {
    app->add_option("--layers", layers, "Encoder layers (L)");
    app->add_option("--hidden", hidden, "Hidden size (H)");
    app->add_option("--heads", heads, "Attention heads (A)");
    app->add_option("--ffn", ffn, "Feed-forward size (D)");
    app->add_option("--vocab", vocab, "Vocabulary size (V)");
    app->add_option("--max-seq-len", max_seq_len, "Position embeddings");
    app->add_option("--num-classes", num_classes, "Classifier outputs");
  }

  void Apply(ArchConfig& c, const nlohmann::json& file) const {
    Resolve(c.layers, layers, file, "layers");
    Resolve(c.hidden, hidden, file, "hidden");
    Resolve(c.heads, heads, file, "heads");
    Resolve(c.ffn, ffn, file, "ffn");
    Resolve(c.vocab, vocab, file, "vocab");
    Resolve(c.max_seq_len, max_seq_len, file, "max_seq_len");
    Resolve(c.num_classes, num_classes, file, "num_classes");
  }
};

void Print(const nlohmann::json& doc) { std::cout << doc.dump(2) << '\n'; }

int Main(int argc, char** argv) {
  CLI::App app{"GA-guided encoder compression with knowledge distillation"};
  app.require_subcommand(1);

  // estimate
  auto* estimate = app.add_subcommand("estimate", "Size and FLOPs estimate");
  std::string est_config;
  ArchFlags est_arch;
  std::optional<std::string> est_space;
  std::optional<int64_t> est_seq_len;
  std::optional<int> est_bytes;
  std::string est_out;
  estimate->add_option("--config", est_config, "Architecture JSON file");
  est_arch.Register(estimate);
  estimate->add_option("--space", est_space, "Grid to validate against")
      ->check(CLI::IsMember({"table1", "none"}));
  estimate->add_option("--seq-len", est_seq_len, "Sequence length for FLOPs");
  estimate->add_option("--bytes-per-param", est_bytes, "1, 2, 4 or 8");
  estimate->add_option("--out", est_out, "Also write estimate_report.json");

  // search
  auto* search = app.add_subcommand("search", "GA architecture search");
  std::string search_config, search_out = ".";
  std::optional<double> target_mb, target_fraction, crossover;
  std::optional<int> population, max_iter, child_size;
  std::optional<int64_t> fit_seq_len, ctx_seq_len, ctx_classes;
  std::optional<uint64_t> search_seed;
  std::optional<std::string> teacher_ckpt;
  search->add_option("--config", search_config, "GA parameter JSON file");
  search->add_option("--target-mb", target_mb, "Target size in MB");
  search->add_option("--target-fraction", target_fraction,
                     "Target as a fraction of the teacher checkpoint size");
  search->add_option("--teacher", teacher_ckpt,
                     "Teacher checkpoint for --target-fraction");
  search->add_option("--population", population, "Population size");
  search->add_option("--crossover-rate", crossover, "Crossover probability");
  search->add_option("--max-iter", max_iter, "Iterations");
  search->add_option("--child-size", child_size, "Children per iteration");
  search->add_option("--seq-len", fit_seq_len, "Sequence length for GFLOPs");
  search->add_option("--max-seq-len", ctx_seq_len, "Student max_seq_len");
  search->add_option("--num-classes", ctx_classes, "Student num_classes");
  search->add_option("--seed", search_seed, "RNG seed");
  search->add_option("--out", search_out, "Output directory");

  // teach
  auto* teach = app.add_subcommand("teach", "Generate corpus, train teacher");
  std::string teach_config, teach_out = ".";
  ArchFlags teach_arch;
  std::optional<int> t_epochs, t_batch, t_labeled, t_unlabeled, t_val, t_test,
      t_min_len, t_max_len;
  std::optional<double> t_lr, t_stop;
  std::optional<uint64_t> t_seed, t_task_seed;
  teach->add_option("--config", teach_config, "Flat JSON settings");
  teach_arch.Register(teach);
  teach->add_option("--epochs", t_epochs, "Maximum epochs");
  teach->add_option("--batch-size", t_batch, "Mini-batch size");
  teach->add_option("--learning-rate", t_lr, "Adam learning rate");
  teach->add_option("--stop-at-val-accuracy", t_stop,
                    "Stop once validation accuracy reaches this value");
  teach->add_option("--seed", t_seed, "Training seed");
  teach->add_option("--task-seed", t_task_seed, "Corpus seed");
  teach->add_option("--labeled", t_labeled, "Labeled split size");
  teach->add_option("--unlabeled", t_unlabeled, "Unlabeled split size");
  teach->add_option("--val", t_val, "Validation split size");
  teach->add_option("--test", t_test, "Test split size");
  teach->add_option("--min-len", t_min_len, "Shortest sequence");
  teach->add_option("--max-len", t_max_len, "Longest sequence");
  teach->add_option("--out", teach_out, "Output directory");

  // capture
  auto* capture = app.add_subcommand("capture", "Record teacher logits");
  std::string capture_out = ".";
  bool lenient = false;
  capture->add_flag("--lenient", lenient, "Skip invalid sequences");
  capture->add_option("--out", capture_out, "Output directory");

  // distill
  auto* distill = app.add_subcommand("distill", "Train the student");
  std::string distill_config, distill_out = ".";
  std::optional<double> d_temp, d_lr;
  std::optional<int> d_epochs, d_batch;
  std::optional<uint64_t> d_seed;
  std::optional<std::string> d_arch;
  distill->add_option("--config", distill_config, "Flat JSON settings");
  distill->add_option("--temperature", d_temp, "Softmax temperature");
  distill->add_option("--learning-rate", d_lr, "Adam learning rate");
  distill->add_option("--epochs", d_epochs, "Epochs");
  distill->add_option("--batch-size", d_batch, "Mini-batch size");
  distill->add_option("--seed", d_seed, "Student seed");
  distill->add_option("--arch", d_arch, "Student architecture JSON");
  distill->add_option("--out", distill_out, "Output directory");

  // bench
  auto* bench = app.add_subcommand("bench", "Forward latency benchmark");
  std::string bench_config, bench_out = ".";
  std::vector<std::string> bench_ckpts;
  std::optional<int> b_n, b_repeats, b_threads;
  std::optional<int64_t> b_seq_len;
  std::optional<uint64_t> b_seed;
  bench->add_option("--config", bench_config, "Flat JSON settings");
  bench->add_option("--checkpoint", bench_ckpts,
                    "Checkpoints to time (default teacher and student)");
  bench->add_option("-n,--examples", b_n, "Examples sampled from test");
  bench->add_option("--repeats", b_repeats, "Repeats");
  bench->add_option("--seq-len", b_seq_len, "Truncate inputs to this length");
  bench->add_option("--threads", b_threads, "Thread count");
  bench->add_option("--seed", b_seed, "Sampling seed");
  bench->add_option("--out", bench_out, "Output directory");

  // report
  auto* report = app.add_subcommand("report", "Merge command reports");
  std::string report_out = ".";
  report->add_option("--out", report_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  if (estimate->parsed()) {
    EstimateOptions o;
    const auto file = LoadConfig(est_config);
    if (!est_config.empty()) o.config = ArchConfigFromJson(file);
    est_arch.Apply(o.config, nlohmann::json::object());
    o.check_table1 = est_space.value_or("none") == "table1";
    o.seq_len = est_seq_len;
    if (est_bytes) o.bytes_per_param = *est_bytes;
    const RunReport r = RunEstimate(o);
    if (!est_out.empty()) SaveRunReport(r, est_out);
    Print(r.metrics);
  } else if (search->parsed()) {
    SearchOptions o;
    const auto file = LoadConfig(search_config);
    GaParams& ga = o.ga;
    Resolve(ga.target_size_mb, target_mb, file, "target_mb");
    Resolve(ga.population_size, population, file, "population");
    Resolve(ga.crossover_rate, crossover, file, "crossover_rate");
    Resolve(ga.max_iter, max_iter, file, "max_iter");
    Resolve(ga.child_size, child_size, file, "child_size");
    Resolve(ga.fitness_seq_len, fit_seq_len, file, "seq_len");
    Resolve(ga.context.max_seq_len, ctx_seq_len, file, "max_seq_len");
    Resolve(ga.context.num_classes, ctx_classes, file, "num_classes");
    Resolve(ga.rng_seed, search_seed, file, "seed");
    std::optional<double> fraction = target_fraction;
    if (!fraction && file.contains("target_fraction")) {
      fraction = file["target_fraction"].get<double>();
    }
    if (!target_mb && !fraction && !file.contains("target_mb")) {
      throw ValidationError("search needs --target-mb or --target-fraction");
    }
    if ((target_mb || file.contains("target_mb")) && fraction) {
      throw ValidationError("--target-mb and --target-fraction conflict");
    }
    if (!(ga.target_size_mb > 0.0)) {
      throw ValidationError("--target-mb must be > 0");
    }
    o.target_fraction = fraction;
    if (teacher_ckpt) o.teacher_checkpoint = *teacher_ckpt;
    o.out_dir = search_out;
    RunSearch(o);
    Print(ReadJsonFile(fs::path(search_out) / files::kGaResult));
  } else if (teach->parsed()) {
    TeachOptions o;
    const auto file = LoadConfig(teach_config);
    teach_arch.Apply(o.teacher, file);
    Resolve(o.training.epochs, t_epochs, file, "epochs");
    Resolve(o.training.batch_size, t_batch, file, "batch_size");
    Resolve(o.training.learning_rate, t_lr, file, "learning_rate");
    Resolve(o.training.stop_at_val_accuracy, t_stop, file,
            "stop_at_val_accuracy");
    Resolve(o.training.rng_seed, t_seed, file, "seed");
    Resolve(o.task.rng_seed, t_task_seed, file, "task_seed");
    Resolve(o.task.labeled, t_labeled, file, "labeled");
    Resolve(o.task.unlabeled, t_unlabeled, file, "unlabeled");
    Resolve(o.task.val, t_val, file, "val");
    Resolve(o.task.test, t_test, file, "test");
    Resolve(o.task.min_len, t_min_len, file, "min_len");
    Resolve(o.task.max_len, t_max_len, file, "max_len");
    o.task.vocab_size = static_cast<int32_t>(o.teacher.vocab);
    o.out_dir = teach_out;
    Print(RunTeach(o).ToJson());
  } else if (capture->parsed()) {
    CaptureOptions o;
    o.strict = !lenient;
    o.out_dir = capture_out;
    Print(RunCapture(o).ToJson());
  } else if (distill->parsed()) {
    DistillOptions o;
    const auto file = LoadConfig(distill_config);
    Resolve(o.params.temperature, d_temp, file, "temperature");
    Resolve(o.params.learning_rate, d_lr, file, "learning_rate");
    Resolve(o.params.epochs, d_epochs, file, "epochs");
    Resolve(o.params.batch_size, d_batch, file, "batch_size");
    Resolve(o.params.rng_seed, d_seed, file, "seed");
    if (d_arch) o.student_arch = *d_arch;
    o.out_dir = distill_out;
    Print(RunDistill(o).ToJson());
  } else if (bench->parsed()) {
    BenchOptions o;
    const auto file = LoadConfig(bench_config);
    Resolve(o.examples, b_n, file, "examples");
    Resolve(o.repeats, b_repeats, file, "repeats");
    Resolve(o.seq_len, b_seq_len, file, "seq_len");
    Resolve(o.threads, b_threads, file, "threads");
    Resolve(o.seed, b_seed, file, "seed");
    for (const auto& p : bench_ckpts) o.checkpoints.emplace_back(p);
    o.out_dir = bench_out;
    Print(RunBench(o).ToJson());
  } else if (report->parsed()) {
    Print(RunReportMerge(report_out).ToJson());
  }
  return kExitOk;
}

}  // namespace
}  // namespace gacompress

int main(int argc, char** argv) {
  using namespace gacompress;
  try {
    return Main(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DependencyError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDependency;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
