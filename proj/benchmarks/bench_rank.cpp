#include <benchmark/benchmark.h>

#include <random>

#include "loadrank/mcdm.hpp"

namespace {

std::vector<loadrank::CriterionScores> random_instance(std::size_t n, std::size_t criteria, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> atoms(1, 4);
    std::vector<loadrank::CriterionScores> out(n);
    for (auto& alt : out) {
        for (std::size_t a = 0; a < criteria; ++a) {
            const int k = atoms(rng);
            std::vector<loadrank::ScoreAtom> support;
            double total = 0.0;
            for (int i = 0; i < k; ++i) {
                support.push_back({u(rng), 0.05 + u(rng)});
                total += support.back().prob;
            }
            for (auto& s : support) s.prob /= total;
            alt.push_back(loadrank::ScoreDistribution::from_atoms(support));
        }
    }
    return out;
}

void BM_Rank(benchmark::State& state) {
    const auto scores = random_instance(static_cast<std::size_t>(state.range(0)), 2, 7);
    const loadrank::CriteriaConfig config;
    for (auto _ : state) benchmark::DoNotOptimize(loadrank::rank(scores, config));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Rank)->RangeMultiplier(2)->Range(16, 256)->Unit(benchmark::kMillisecond)->Complexity(benchmark::oNSquared);

void BM_RankThreeCriteria(benchmark::State& state) {
    const auto scores = random_instance(120, 3, 11);
    loadrank::CriteriaConfig config;
    config.criteria = {"a", "b", "c"};
    config.weights = {0.5, 0.3, 0.2};
    for (auto _ : state) benchmark::DoNotOptimize(loadrank::rank(scores, config));
}
BENCHMARK(BM_RankThreeCriteria)->Unit(benchmark::kMillisecond);

void BM_BruteForceRank(benchmark::State& state) {
    const auto scores = random_instance(6, 2, 3);
    const loadrank::CriteriaConfig config;
    for (auto _ : state) benchmark::DoNotOptimize(loadrank::brute_force_rank(scores, config));
}
BENCHMARK(BM_BruteForceRank);

}  // namespace
BENCHMARK_MAIN();
