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

// Genetic search for a small encoder architecture under a size budget.
//
// A chromosome is the ordered gene list (layers, hidden, heads, ffn, vocab).
// Fitness is GFLOPs(s) - |size_mb(s) - target_mb|, so the search prefers the
// most compute-heavy architecture whose size lands on the budget. Each
// iteration produces child_size children by cut-off crossover (probability r)
// or cut-off mutation, merges them into the population and keeps the
// population_size fittest.

#ifndef GACOMPRESS_GASEARCH_H_
#define GACOMPRESS_GASEARCH_H_

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "gacompress/archspace.h"
#include "json.hpp"

namespace gacompress {

using Rng = std::mt19937_64;

inline constexpr int kNumGenes = 5;
inline constexpr std::array<const char*, kNumGenes> kGeneNames = {
    "layers", "hidden", "heads", "ffn", "vocab"};

struct Chromosome {
  std::array<int64_t, kNumGenes> genes{};

  int64_t layers() const { return genes[0]; }
  int64_t hidden() const { return genes[1]; }
  int64_t heads() const { return genes[2]; }
  int64_t ffn() const { return genes[3]; }
  int64_t vocab() const { return genes[4]; }

  static Chromosome FromArch(const ArchConfig& config);

  friend bool operator==(const Chromosome&, const Chromosome&) = default;
  friend auto operator<=>(const Chromosome&, const Chromosome&) = default;
};

// Task context a chromosome is completed with before estimation.
struct ArchContext {
  int64_t max_seq_len = 512;
  int64_t num_classes = 2;
};

ArchConfig ToArch(const Chromosome& c, const ArchContext& context);

struct GaParams {
  int population_size = 50;
  double crossover_rate = 0.6;
  int max_iter = 100;
  int child_size = 50;
  double target_size_mb = 3.0;
  int64_t fitness_seq_len = 400;
  uint64_t rng_seed = 0;
  ArchContext context;
};

// Throws ValidationError if any field is out of range.
void CheckGaParams(const GaParams& params);

struct ScoredChromosome {
  Chromosome chromosome;
  double fitness = 0.0;
  double size_gap = 0.0;  // |t_s - T| in megabytes
};

struct GaResult {
  Chromosome best;
  double best_fitness = 0.0;
  std::vector<double> history;  // best fitness after each iteration
  double elapsed_seconds = 0.0;
  int64_t evaluations = 0;
};

double Fitness(const Chromosome& s, const GaParams& params);
ScoredChromosome Score(const Chromosome& s, const GaParams& params);

std::vector<Chromosome> RandomInitialization(const SearchSpace& space,
                                             const GaParams& params, Rng& rng);

Chromosome RandomChromosome(const SearchSpace& space, Rng& rng);

// Cut-off position h is 1-based over the five genes; genes 1..h come from
// the first parent. h must lie in [1, 4].
Chromosome CrossoverAt(const Chromosome& c1, const Chromosome& c2, int h);
Chromosome Crossover(const Chromosome& c1, const Chromosome& c2, Rng& rng);

// Genes after h are resampled uniformly from their grids.
Chromosome MutationAt(const Chromosome& c1, const SearchSpace& space, int h,
                      Rng& rng);
Chromosome Mutation(const Chromosome& c1, const SearchSpace& space, Rng& rng);

// Keeps the population_size fittest, ordered best first. Ties fall back to
// the smaller size gap, then to lexicographic gene order. Duplicates stay.
std::vector<ScoredChromosome> Selection(std::vector<ScoredChromosome> merged,
                                        int population_size);

// True when `a` ranks strictly before `b` under the selection order.
bool RanksBefore(const ScoredChromosome& a, const ScoredChromosome& b);

GaResult Search(const SearchSpace& space, const GaParams& params);

nlohmann::json ToJson(const GaParams& params);
// {best, best_fitness, size_mb, gflops, history, elapsed_seconds, seed, ...}
nlohmann::json ToJson(const GaResult& result, const GaParams& params);

}  // namespace gacompress

#endif  // GACOMPRESS_GASEARCH_H_
