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

// Low-level bindings. Structured values cross the boundary as JSON text;
// the gacompress package decodes them.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "gacompress/archspace.h"
#include "gacompress/distill.h"
#include "gacompress/errors.h"
#include "gacompress/estimators.h"
#include "gacompress/gasearch.h"
#include "gacompress/pipeline.h"

namespace py = pybind11;

namespace gacompress {
namespace {

using Json = nlohmann::json;

ArchConfig ParseArch(const std::string& text) {
  return ArchConfigFromJson(Json::parse(text));
}

GaParams ParseGa(const std::string& text) {
  const Json doc = Json::parse(text);
  GaParams p;
  p.population_size = doc.value("population_size", p.population_size);
  p.crossover_rate = doc.value("crossover_rate", p.crossover_rate);
  p.max_iter = doc.value("max_iter", p.max_iter);
  p.child_size = doc.value("child_size", p.child_size);
  p.target_size_mb = doc.value("target_size_mb", p.target_size_mb);
  p.fitness_seq_len = doc.value("fitness_seq_len", p.fitness_seq_len);
  p.rng_seed = doc.value("seed", p.rng_seed);
  p.context.max_seq_len = doc.value("max_seq_len", p.context.max_seq_len);
  p.context.num_classes = doc.value("num_classes", p.context.num_classes);
  CheckGaParams(p);
  return p;
}

std::string Estimate(const std::string& arch, std::optional<int64_t> seq_len,
                     int bytes_per_param, bool check_table1) {
  EstimateOptions o;
  o.config = ParseArch(arch);
  o.seq_len = seq_len;
  o.bytes_per_param = bytes_per_param;
  o.check_table1 = check_table1;
  return RunEstimate(o).metrics.dump();
}

double FitnessOf(const std::vector<int64_t>& genes, const std::string& ga) {
  if (genes.size() != kNumGenes) {
    throw ValidationError("expected 5 genes: layers, hidden, heads, ffn, vocab");
  }
  Chromosome c;
  std::copy(genes.begin(), genes.end(), c.genes.begin());
  return Fitness(c, ParseGa(ga));
}

std::string SearchGa(const std::string& ga) {
  const GaParams p = ParseGa(ga);
  return ToJson(Search(SearchSpace::DefaultTable1(), p), p).dump();
}

py::tuple SoftCe(const std::vector<double>& p, const std::vector<double>& q,
                 double temperature) {
  if (p.size() != q.size() || p.empty()) {
    throw ValidationError("p and q must be non-empty and the same length");
  }
  const Eigen::Map<const Eigen::VectorXd> pv(p.data(), p.size());
  const Eigen::Map<const Eigen::VectorXd> qv(q.data(), q.size());
  Eigen::VectorXd dq;
  const double loss = SoftCeLoss(pv, qv, temperature, &dq);
  return py::make_tuple(loss, std::vector<double>(dq.begin(), dq.end()));
}

std::string Teach(const std::string& out_dir, const std::string& arch,
                  const std::string& task, int epochs, uint64_t seed) {
  TeachOptions o;
  o.out_dir = out_dir;
  if (!arch.empty()) o.teacher = ParseArch(arch);
  if (!task.empty()) o.task = TaskSpecFromJson(Json::parse(task));
  if (epochs > 0) o.training.epochs = epochs;
  o.training.rng_seed = seed;
  return RunTeach(o).ToJson().dump();
}

std::string Capture(const std::string& out_dir, bool strict) {
  CaptureOptions o;
  o.out_dir = out_dir;
  o.strict = strict;
  return RunCapture(o).ToJson().dump();
}

std::string SearchRun(const std::string& out_dir, const std::string& ga,
                      std::optional<double> target_fraction,
                      std::optional<std::string> teacher) {
  SearchOptions o;
  o.out_dir = out_dir;
  o.ga = ParseGa(ga);
  o.target_fraction = target_fraction;
  if (teacher) o.teacher_checkpoint = *teacher;
  return RunSearch(o).ToJson().dump();
}

std::string Distill(const std::string& out_dir, double temperature,
                    double learning_rate, int epochs, int batch_size,
                    uint64_t seed) {
  DistillOptions o;
  o.out_dir = out_dir;
  o.params.temperature = temperature;
  o.params.learning_rate = learning_rate;
  o.params.epochs = epochs;
  o.params.batch_size = batch_size;
  o.params.rng_seed = seed;
  return RunDistill(o).ToJson().dump();
}

std::string Bench(const std::string& out_dir, int examples, int repeats,
                  uint64_t seed) {
  BenchOptions o;
  o.out_dir = out_dir;
  o.examples = examples;
  o.repeats = repeats;
  o.seed = seed;
  return RunBench(o).ToJson().dump();
}

}  // namespace
}  // namespace gacompress

PYBIND11_MODULE(_gacompress, m) {
  using namespace gacompress;
  m.doc() = "gacompress native core";

  py::register_exception<ValidationError>(m, "ValidationError",
                                          PyExc_ValueError);
  py::register_exception<DependencyError>(m, "DependencyError",
                                          PyExc_FileNotFoundError);
  py::register_exception<NumericalError>(m, "NumericalError",
                                         PyExc_ArithmeticError);

  m.def("cardinality", [] { return SearchSpace::DefaultTable1().cardinality(); });
  m.def("reference_arch", [] { return ToJson(PretrainedReference()).dump(); });
  m.def("estimate", &Estimate, py::arg("arch"), py::arg("seq_len") = py::none(),
        py::arg("bytes_per_param") = 4, py::arg("check_grid") = false);
  m.def("fitness", &FitnessOf, py::arg("genes"), py::arg("ga"));
  m.def("search", &SearchGa, py::arg("ga"));
  m.def("soft_ce_loss", &SoftCe, py::arg("p"), py::arg("q"),
        py::arg("temperature"));
  m.def("teach", &Teach, py::arg("out_dir"), py::arg("arch") = "",
        py::arg("task") = "", py::arg("epochs") = 0, py::arg("seed") = 11);
  m.def("capture", &Capture, py::arg("out_dir"), py::arg("strict") = true);
  m.def("search_run", &SearchRun, py::arg("out_dir"), py::arg("ga"),
        py::arg("target_fraction") = py::none(),
        py::arg("teacher") = py::none());
  m.def("distill", &Distill, py::arg("out_dir"), py::arg("temperature") = 2.0,
        py::arg("learning_rate") = 1e-3, py::arg("epochs") = 20,
        py::arg("batch_size") = 32, py::arg("seed") = 0);
  m.def("bench", &Bench, py::arg("out_dir"), py::arg("examples") = 100,
        py::arg("repeats") = 3, py::arg("seed") = 0);
  m.def("report", [](const std::string& out_dir) {
    return RunReportMerge(out_dir).ToJson().dump();
  });
}
