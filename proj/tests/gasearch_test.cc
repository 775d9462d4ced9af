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

#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "gacompress/errors.h"
#include "gacompress/estimators.h"

namespace gacompress {
namespace {

const Chromosome kC1{{3, 512, 4, 1024, 10000}};
const Chromosome kC2{{6, 256, 8, 2048, 20000}};

bool Valid(const Chromosome& c, const SearchSpace& space) {
  return !Validate(ToArch(c, ArchContext{}), space).has_value();
}

TEST(FitnessTest, FrozenRegressionValue) {
  GaParams params;
  params.target_size_mb = 3.0;
  const ScoredChromosome s = Score(kC1, params);
  const ArchConfig arch = ToArch(kC1, params.context);
  EXPECT_EQ(ParamCount(arch), 11955202);
  EXPECT_EQ(ForwardFlops(arch, 400).flops, 6016731136);
  EXPECT_NEAR(s.fitness, -36.58874524339453125, 1e-12);
  EXPECT_NEAR(s.size_gap, 42.60547637939453125, 1e-12);
}

TEST(FitnessTest, ExactSizeGivesPureGflops) {
  GaParams params;
  const ArchConfig arch = ToArch(kC2, params.context);
  params.target_size_mb = ModelSize(arch).megabytes;
  EXPECT_DOUBLE_EQ(Fitness(kC2, params), ForwardFlops(arch, 400).gflops);
}

TEST(FitnessTest, SmallerGapWinsAtEqualFlops) {
  GaParams params;
  params.target_size_mb = 3.0;
  // Vocab changes size but not FLOPs.
  Chromosome a{{1, 64, 1, 128, 1000}};
  Chromosome b = a;
  const auto mb = [&](const Chromosome& c) {
    return ModelSize(ToArch(c, params.context)).megabytes;
  };
  a.genes[4] = 11000;
  b.genes[4] = 13000;
  ASSERT_EQ(ForwardFlops(ToArch(a, params.context), 400).flops,
            ForwardFlops(ToArch(b, params.context), 400).flops);
  ASSERT_LT(mb(a), 3.0);
  ASSERT_GT(mb(b), 3.0);
  ASSERT_LT(std::abs(mb(a) - 3.0), std::abs(mb(b) - 3.0));
  EXPECT_GT(Fitness(a, params), Fitness(b, params));
}

TEST(RandomInitializationTest, DeterministicAndValid) {
  const SearchSpace space = SearchSpace::DefaultTable1();
  GaParams params;
  Rng r1(42), r2(42);
  const auto p1 = RandomInitialization(space, params, r1);
  const auto p2 = RandomInitialization(space, params, r2);
  EXPECT_EQ(p1, p2);
  EXPECT_EQ(p1.size(), 50u);
  for (const Chromosome& c : p1) EXPECT_TRUE(Valid(c, space));
}

TEST(RandomInitializationTest, HeadsAreUniform) {
  const SearchSpace space = SearchSpace::DefaultTable1();
  Rng rng(2024);
  std::map<int64_t, int> counts;
  constexpr int kSamples = 10000;
  for (int i = 0; i < kSamples; ++i) ++counts[RandomChromosome(space, rng).heads()];
  ASSERT_EQ(counts.size(), 4u);
  double chi2 = 0.0;
  for (const auto& [heads, n] : counts) {
    EXPECT_NEAR(static_cast<double>(n) / kSamples, 0.25, 0.02) << heads;
    const double expected = kSamples / 4.0;
    chi2 += (n - expected) * (n - expected) / expected;
  }
  // 99.9th percentile of chi-square with 3 degrees of freedom.
  EXPECT_LT(chi2, 16.266);
}

TEST(CrossoverTest, CutoffSemantics) {
  EXPECT_EQ(CrossoverAt(kC1, kC2, 2), (Chromosome{{3, 512, 8, 2048, 20000}}));
  EXPECT_EQ(CrossoverAt(kC1, kC2, 4), (Chromosome{{3, 512, 4, 1024, 20000}}));
  EXPECT_EQ(CrossoverAt(kC1, kC2, 1), (Chromosome{{3, 256, 8, 2048, 20000}}));
  EXPECT_THROW(CrossoverAt(kC1, kC2, 0), ValidationError);
  EXPECT_THROW(CrossoverAt(kC1, kC2, 5), ValidationError);
}

TEST(CrossoverTest, EqualParentsGiveParent) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(Crossover(kC1, kC1, rng), kC1);
}

TEST(CrossoverTest, GeneMembershipAndCutoffCoverage) {
  const SearchSpace space = SearchSpace::DefaultTable1();
  Rng rng(9);
  std::map<int, int> cutoffs;
  for (int i = 0; i < 1000; ++i) {
    const Chromosome child = Crossover(kC1, kC2, rng);
    for (int g = 0; g < kNumGenes; ++g) {
      EXPECT_TRUE(child.genes[g] == kC1.genes[g] || child.genes[g] == kC2.genes[g]);
    }
    EXPECT_EQ(child.layers(), kC1.layers());
    EXPECT_EQ(child.vocab(), kC2.vocab());
    EXPECT_TRUE(Valid(child, space));
    int h = 1;
    while (h < kNumGenes && child.genes[h] == kC1.genes[h]) ++h;
    ++cutoffs[h];
  }
  EXPECT_EQ(cutoffs.size(), 4u);
}

TEST(MutationTest, PrefixPreservedAndValid) {
  const SearchSpace space = SearchSpace::DefaultTable1();
  Rng rng(3);
  for (int h = 1; h < kNumGenes; ++h) {
    for (int i = 0; i < 200; ++i) {
      const Chromosome child = MutationAt(kC1, space, h, rng);
      for (int g = 0; g < h; ++g) EXPECT_EQ(child.genes[g], kC1.genes[g]);
      EXPECT_TRUE(Valid(child, space));
    }
  }
  for (int i = 0; i < 200; ++i) {
    const Chromosome child = MutationAt(kC1, space, 4, rng);
    EXPECT_EQ(child.ffn(), kC1.ffn());
    EXPECT_EQ(child.heads(), kC1.heads());
  }
  for (int i = 0; i < 1000; ++i) {
    const Chromosome child = Mutation(kC1, space, rng);
    EXPECT_EQ(child.layers(), kC1.layers());
    EXPECT_TRUE(Valid(child, space));
  }
  EXPECT_THROW(MutationAt(kC1, space, 5, rng), ValidationError);
}

std::vector<ScoredChromosome> ScoredSample(int n, uint64_t seed) {
  const SearchSpace space = SearchSpace::DefaultTable1();
  GaParams params;
  Rng rng(seed);
  std::vector<ScoredChromosome> out;
  for (int i = 0; i < n; ++i) out.push_back(Score(RandomChromosome(space, rng), params));
  return out;
}

TEST(SelectionTest, SortedInputOfExactSizeIsUnchanged) {
  auto merged = ScoredSample(50, 4);
  std::stable_sort(merged.begin(), merged.end(), RanksBefore);
  const auto out = Selection(merged, 50);
  ASSERT_EQ(out.size(), merged.size());
  for (size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].chromosome, merged[i].chromosome);
  }
}

TEST(SelectionTest, KeepsTopByFitness) {
  const auto merged = ScoredSample(100, 5);
  const auto kept = Selection(merged, 50);
  ASSERT_EQ(kept.size(), 50u);
  double min_kept = kept.front().fitness;
  for (const auto& s : kept) min_kept = std::min(min_kept, s.fitness);
  std::vector<double> all;
  for (const auto& s : merged) all.push_back(s.fitness);
  std::sort(all.begin(), all.end(), std::greater<>());
  // Every discarded fitness is at most the weakest survivor.
  EXPECT_GE(min_kept, all[50]);
  EXPECT_DOUBLE_EQ(min_kept, all[49]);
}

TEST(SelectionTest, RetainsDuplicatesAndBreaksTies) {
  GaParams params;
  std::vector<ScoredChromosome> merged;
  for (int i = 0; i < 3; ++i) merged.push_back(Score(kC1, params));
  merged.push_back(Score(kC2, params));
  const auto kept = Selection(merged, 3);
  const int dup = static_cast<int>(std::count_if(
      kept.begin(), kept.end(),
      [](const ScoredChromosome& s) { return s.chromosome == kC1; }));
  EXPECT_GE(dup, 2);

  ScoredChromosome a{kC2, 1.0, 0.5}, b{kC1, 1.0, 0.5}, c{kC1, 1.0, 0.2};
  const auto ranked = Selection({a, b, c}, 3);
  EXPECT_EQ(ranked[0].chromosome, kC1);
  EXPECT_DOUBLE_EQ(ranked[0].size_gap, 0.2);
  EXPECT_EQ(ranked[1].chromosome, kC1);  // lexicographically before kC2
  EXPECT_EQ(ranked[2].chromosome, kC2);
  EXPECT_THROW(Selection({a}, 2), ValidationError);
}

TEST(SearchTest, DeterministicBySeed) {
  const SearchSpace space = SearchSpace::DefaultTable1();
  GaParams params;
  params.rng_seed = 77;
  const GaResult a = Search(space, params);
  const GaResult b = Search(space, params);
  EXPECT_EQ(a.best, b.best);
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(a.best_fitness, b.best_fitness);
  params.rng_seed = 78;
  const GaResult c = Search(space, params);
  EXPECT_NE(a.history, c.history);
}

TEST(SearchTest, ElitismBudgetAndTarget) {
  const SearchSpace space = SearchSpace::DefaultTable1();
  for (uint64_t seed : {0u, 1u, 2u}) {
    GaParams params;
    params.rng_seed = seed;
    const GaResult r = Search(space, params);
    ASSERT_EQ(r.history.size(), 100u);
    EXPECT_TRUE(std::is_sorted(r.history.begin(), r.history.end()));
    EXPECT_EQ(r.evaluations, 50 + 100 * 50);
    EXPECT_DOUBLE_EQ(r.best_fitness, Fitness(r.best, params));
    EXPECT_DOUBLE_EQ(r.best_fitness, r.history.back());
    EXPECT_TRUE(Valid(r.best, space));
    const double mb = ModelSize(ToArch(r.best, params.context)).megabytes;
    EXPECT_GE(mb, 2.8);
    EXPECT_LE(mb, 3.2);
    EXPECT_LT(r.elapsed_seconds, 60.0);
  }
}

TEST(SearchTest, NeverWorseThanInitialPopulation) {
  const SearchSpace space = SearchSpace::DefaultTable1();
  for (uint64_t seed = 0; seed < 5; ++seed) {
    GaParams params;
    params.rng_seed = seed;
    const GaResult r = Search(space, params);
    Rng rng(seed);
    double best_initial = -1e300;
    for (const Chromosome& c : RandomInitialization(space, params, rng)) {
      best_initial = std::max(best_initial, Fitness(c, params));
    }
    EXPECT_GE(r.history.front(), best_initial);
    EXPECT_GE(r.best_fitness, best_initial);
  }
}

TEST(SearchTest, RejectsBadParams) {
  const SearchSpace space = SearchSpace::DefaultTable1();
  GaParams params;
  params.target_size_mb = 0.0;
  EXPECT_THROW(Search(space, params), ValidationError);
  params = GaParams{};
  params.crossover_rate = 1.5;
  EXPECT_THROW(Search(space, params), ValidationError);
  params = GaParams{};
  params.fitness_seq_len = 600;
  EXPECT_THROW(Search(space, params), ValidationError);
}

TEST(GaResultJsonTest, CarriesSeedAndBestArch) {
  const SearchSpace space = SearchSpace::DefaultTable1();
  GaParams params;
  params.max_iter = 3;
  params.rng_seed = 5;
  const GaResult r = Search(space, params);
  const auto doc = ToJson(r, params);
  EXPECT_EQ(doc["seed"], 5);
  EXPECT_EQ(doc["history"].size(), 3u);
  EXPECT_EQ(ArchConfigFromJson(doc["best"]), ToArch(r.best, params.context));
  for (const char* key : {"best_fitness", "size_mb", "gflops", "elapsed_seconds"}) {
    EXPECT_TRUE(doc.contains(key)) << key;
  }
}

}  // namespace
}  // namespace gacompress
