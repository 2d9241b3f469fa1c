#include <benchmark/benchmark.h>

#include "loadrank/controller.hpp"
#include "loadrank/emulator.hpp"
#include "loadrank/scoring.hpp"

namespace {

void BM_ComfortHvac(benchmark::State& state) {
    double t = 19.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(loadrank::comfort_hvac(t, 22.0, 3.0, 10.0));
        t = t < 25.0 ? t + 0.01 : 19.0;
    }
}
BENCHMARK(BM_ComfortHvac);

void BM_CurtailmentScore(benchmark::State& state) {
    const loadrank::CurtailmentScaleParams scale{10.0, 2000.0, 80.0};
    double p = 80.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(loadrank::curtailment_score(p, scale));
        p = p < 2000.0 ? p + 1.0 : 80.0;
    }
}
BENCHMARK(BM_CurtailmentScore);

// Full decision-time ranking of the 15-zone reference office (270 alternatives).
void BM_RankFleet(benchmark::State& state) {
    const auto building = loadrank::make_reference_building();
    loadrank::FleetInputs in;
    const auto chiller = loadrank::plant_chiller_model(building, {});
    in.chiller = &chiller;
    int i = 0;
    for (const auto* z : building.zones()) {
        in.occupied_prob[z->id] = (i++ % 3) / 2.0;
        for (const auto& a : z->appliances) in.references[a.id] = {a.power_at(a.baseline_index()), 0.0};
    }
    const loadrank::CriteriaConfig config;
    for (auto _ : state) benchmark::DoNotOptimize(loadrank::rank_fleet(building, in, config));
}
BENCHMARK(BM_RankFleet)->Unit(benchmark::kMillisecond);

}  // namespace
