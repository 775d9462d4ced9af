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

// Command implementations behind the gacompress CLI. Every command reads and
// writes artifacts under one output directory with fixed file names and
// returns a RunReport that is also written as <command>_report.json.

#ifndef GACOMPRESS_PIPELINE_H_
#define GACOMPRESS_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gacompress/archspace.h"
#include "gacompress/corpus.h"
#include "gacompress/distill.h"
#include "gacompress/gasearch.h"
#include "json.hpp"

namespace gacompress {

namespace files {
inline constexpr char kArch[] = "arch.json";
inline constexpr char kGaResult[] = "ga_result.json";
inline constexpr char kTeacherCkpt[] = "teacher.ckpt";
inline constexpr char kLogits[] = "logits.ldst";
inline constexpr char kStudentCkpt[] = "student.ckpt";
inline constexpr char kReport[] = "report.json";
inline constexpr char kCorpusDir[] = "corpus";
inline constexpr char kVocabMap[] = "vocab_map.json";
}  // namespace files

// Process exit codes used by the CLI.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitDependency = 3,
  kExitNumerical = 4,
};

struct RunReport {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  uint64_t seed = 0;
  nlohmann::json metrics = nlohmann::json::object();
  double wall_seconds = 0.0;
  nlohmann::json artifacts = nlohmann::json::object();

  nlohmann::json ToJson() const;
};

// Throws NumericalError if any number inside `doc` is NaN or infinite.
void CheckFinite(const nlohmann::json& doc, const std::string& where = "");

nlohmann::json ReadJsonFile(const std::filesystem::path& path);
void WriteJsonFile(const nlohmann::json& doc, const std::filesystem::path& path);

// ---- estimate --------------------------------------------------------------

struct EstimateOptions {
  ArchConfig config = PretrainedReference();
  bool check_table1 = false;
  std::optional<int64_t> seq_len;  // default min(400, max_seq_len)
  int bytes_per_param = 4;
};

RunReport RunEstimate(const EstimateOptions& options);

// ---- search ----------------------------------------------------------------

struct SearchOptions {
  GaParams ga;
  // When set, the budget is this fraction of the teacher checkpoint's size and
  // max_seq_len/num_classes come from the teacher.
  std::optional<double> target_fraction;
  std::optional<std::filesystem::path> teacher_checkpoint;
  std::filesystem::path out_dir = ".";
};

RunReport RunSearch(const SearchOptions& options);

// ---- teach / capture / distill ----------------------------------------------

struct TeachOptions {
  ArchConfig teacher = ArchConfig{.layers = 4,
                                  .hidden = 128,
                                  .heads = 4,
                                  .ffn = 512,
                                  .vocab = 2000,
                                  .max_seq_len = 32,
                                  .num_classes = 2};
  SyntheticTaskSpec task;
  TeacherParams training{.stop_at_val_accuracy = 0.99};
  std::filesystem::path out_dir = ".";
};

RunReport RunTeach(const TeachOptions& options);

struct CaptureOptions {
  bool strict = true;
  std::filesystem::path out_dir = ".";
};

RunReport RunCapture(const CaptureOptions& options);

struct DistillOptions {
  DistillParams params;
  std::optional<std::filesystem::path> student_arch;  // default out/arch.json
  std::filesystem::path out_dir = ".";
};

RunReport RunDistill(const DistillOptions& options);

// ---- bench -----------------------------------------------------------------

struct BenchOptions {
  std::vector<std::filesystem::path> checkpoints;  // default teacher, student
  int examples = 100;
  int repeats = 3;
  int64_t seq_len = 0;  // 0 keeps test sequences as they are
  int threads = 1;
  uint64_t seed = 0;
  std::filesystem::path out_dir = ".";
};

RunReport RunBench(const BenchOptions& options);

// ---- report ----------------------------------------------------------------

// Merges every <command>_report.json under out_dir into report.json.
RunReport RunReportMerge(const std::filesystem::path& out_dir);

// Writes report to <out>/<command>_report.json.
void SaveRunReport(const RunReport& report, const std::filesystem::path& out);

}  // namespace gacompress

#endif  // GACOMPRESS_PIPELINE_H_
