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

#include "gacompress/gasearch.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "gacompress/errors.h"
#include "gacompress/estimators.h"

namespace gacompress {

namespace {

int64_t SampleGrid(const Grid& grid, Rng& rng) {
  std::uniform_int_distribution<int64_t> index(0, grid.size() - 1);
  return grid.value_at(index(rng));
}

int64_t SampleGene(int gene, const SearchSpace& space, Rng& rng) {
  switch (gene) {
    case 0:
      return SampleGrid(space.layers(), rng);
    case 1:
      return SampleGrid(space.hidden(), rng);
    case 2: {
      const auto& heads = space.heads();
      std::uniform_int_distribution<size_t> index(0, heads.size() - 1);
      return heads[index(rng)];
    }
    case 3:
      return SampleGrid(space.ffn(), rng);
    default:
      return SampleGrid(space.vocab(), rng);
  }
}

int SampleCutoff(Rng& rng) {
  std::uniform_int_distribution<int> cut(1, kNumGenes - 1);
  return cut(rng);
}

}  // namespace

Chromosome Chromosome::FromArch(const ArchConfig& a) {
  return Chromosome{{a.layers, a.hidden, a.heads, a.ffn, a.vocab}};
}

ArchConfig ToArch(const Chromosome& c, const ArchContext& context) {
  return ArchConfig{.layers = c.layers(),
                    .hidden = c.hidden(),
                    .heads = c.heads(),
                    .ffn = c.ffn(),
                    .vocab = c.vocab(),
                    .max_seq_len = context.max_seq_len,
                    .num_classes = context.num_classes};
}

void CheckGaParams(const GaParams& p) {
  if (p.population_size < 2) {
    throw ValidationError("population_size must be >= 2");
  }
  if (!(p.crossover_rate >= 0.0 && p.crossover_rate <= 1.0)) {
    throw ValidationError("crossover_rate must lie in [0, 1]");
  }
  if (p.max_iter < 1) throw ValidationError("max_iter must be >= 1");
  if (p.child_size < 1) throw ValidationError("child_size must be >= 1");
  if (!(p.target_size_mb > 0.0) || !std::isfinite(p.target_size_mb)) {
    throw ValidationError("target_size_mb must be > 0");
  }
  if (p.fitness_seq_len < 1 || p.fitness_seq_len > p.context.max_seq_len) {
    throw ValidationError("fitness_seq_len must lie in [1, max_seq_len]");
  }
  if (p.context.num_classes < 1) {
    throw ValidationError("num_classes must be >= 1");
  }
}

ScoredChromosome Score(const Chromosome& s, const GaParams& params) {
  const ArchConfig arch = ToArch(s, params.context);
  const double gflops = ForwardFlops(arch, params.fitness_seq_len).gflops;
  const double gap = std::abs(ModelSize(arch).megabytes - params.target_size_mb);
  return ScoredChromosome{s, gflops - gap, gap};
}

double Fitness(const Chromosome& s, const GaParams& params) {
  return Score(s, params).fitness;
}

Chromosome RandomChromosome(const SearchSpace& space, Rng& rng) {
  Chromosome c;
  for (int g = 0; g < kNumGenes; ++g) c.genes[g] = SampleGene(g, space, rng);
  return c;
}

std::vector<Chromosome> RandomInitialization(const SearchSpace& space,
                                             const GaParams& params,
                                             Rng& rng) {
  std::vector<Chromosome> population;
  population.reserve(params.population_size);
  for (int i = 0; i < params.population_size; ++i) {
    population.push_back(RandomChromosome(space, rng));
  }
  return population;
}

Chromosome CrossoverAt(const Chromosome& c1, const Chromosome& c2, int h) {
  if (h < 1 || h >= kNumGenes) {
    throw ValidationError("crossover cut-off must lie in [1, 4]");
  }
  Chromosome child = c1;
  for (int g = h; g < kNumGenes; ++g) child.genes[g] = c2.genes[g];
  return child;
}

Chromosome Crossover(const Chromosome& c1, const Chromosome& c2, Rng& rng) {
  return CrossoverAt(c1, c2, SampleCutoff(rng));
}

Chromosome MutationAt(const Chromosome& c1, const SearchSpace& space, int h,
                      Rng& rng) {
  if (h < 1 || h >= kNumGenes) {
    throw ValidationError("mutation cut-off must lie in [1, 4]");
  }
  Chromosome child = c1;
  for (int g = h; g < kNumGenes; ++g) child.genes[g] = SampleGene(g, space, rng);
  return child;
}

Chromosome Mutation(const Chromosome& c1, const SearchSpace& space, Rng& rng) {
  const int h = SampleCutoff(rng);
  return MutationAt(c1, space, h, rng);
}

bool RanksBefore(const ScoredChromosome& a, const ScoredChromosome& b) {
  if (a.fitness != b.fitness) return a.fitness > b.fitness;
  if (a.size_gap != b.size_gap) return a.size_gap < b.size_gap;
  return a.chromosome < b.chromosome;
}

std::vector<ScoredChromosome> Selection(std::vector<ScoredChromosome> merged,
                                        int population_size) {
  if (population_size < 1 ||
      merged.size() < static_cast<size_t>(population_size)) {
    throw ValidationError("selection needs at least population_size entries");
  }
  std::stable_sort(merged.begin(), merged.end(), RanksBefore);
  merged.resize(population_size);
  return merged;
}

GaResult Search(const SearchSpace& space, const GaParams& params) {
  CheckGaParams(params);
  const auto start = std::chrono::steady_clock::now();
  Rng rng(params.rng_seed);
  GaResult result;

  std::vector<ScoredChromosome> population;
  population.reserve(params.population_size + params.child_size);
  for (const Chromosome& c : RandomInitialization(space, params, rng)) {
    population.push_back(Score(c, params));
    ++result.evaluations;
  }

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const int pop = params.population_size;
  std::uniform_int_distribution<int> pick(0, pop - 1);
  std::uniform_int_distribution<int> pick_other(0, pop - 2);
  result.history.reserve(params.max_iter);

  for (int iter = 0; iter < params.max_iter; ++iter) {
    std::vector<ScoredChromosome> merged = population;
    for (int k = 0; k < params.child_size; ++k) {
      Chromosome child;
      if (coin(rng) < params.crossover_rate) {
        const int i = pick(rng);
        int j = pick_other(rng);
        if (j >= i) ++j;
        child = Crossover(population[i].chromosome, population[j].chromosome,
                          rng);
      } else {
        child = Mutation(population[pick(rng)].chromosome, space, rng);
      }
      merged.push_back(Score(child, params));
      ++result.evaluations;
    }
    population = Selection(std::move(merged), pop);
    result.history.push_back(population.front().fitness);
  }

  result.best = population.front().chromosome;
  result.best_fitness = population.front().fitness;
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

nlohmann::json ToJson(const GaParams& p) {
  return nlohmann::json{{"population_size", p.population_size},
                        {"crossover_rate", p.crossover_rate},
                        {"max_iter", p.max_iter},
                        {"child_size", p.child_size},
                        {"target_size_mb", p.target_size_mb},
                        {"fitness_seq_len", p.fitness_seq_len},
                        {"rng_seed", p.rng_seed},
                        {"max_seq_len", p.context.max_seq_len},
                        {"num_classes", p.context.num_classes}};
}

nlohmann::json ToJson(const GaResult& r, const GaParams& params) {
  const ArchConfig best = ToArch(r.best, params.context);
  return nlohmann::json{
      {"best", ToJson(best)},
      {"best_fitness", r.best_fitness},
      {"size_mb", ModelSize(best).megabytes},
      {"gflops", ForwardFlops(best, params.fitness_seq_len).gflops},
      {"history", r.history},
      {"elapsed_seconds", r.elapsed_seconds},
      {"evaluations", r.evaluations},
      {"seed", params.rng_seed},
      {"params", ToJson(params)}};
}

}  // namespace gacompress
