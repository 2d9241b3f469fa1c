#include <benchmark/benchmark.h>

#include "loadrank/occupancy.hpp"

namespace {

const loadrank::OccupancyModel& model() {
    static const auto m = loadrank::fit_occupancy(loadrank::generate_office_trace("z", {}, 5, 60));
    return m;
}

void BM_Forecast(benchmark::State& state) {
    const auto& m = model();
    const auto horizon = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(loadrank::forecast(m, {true, 40}, loadrank::SimTime::at(0, 9), horizon));
    }
}
BENCHMARK(BM_Forecast)->Arg(5)->Arg(60)->Arg(480);

void BM_FitOccupancy(benchmark::State& state) {
    const auto trace = loadrank::generate_office_trace("z", {}, 9, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(loadrank::fit_occupancy(trace));
}
BENCHMARK(BM_FitOccupancy)->Arg(30)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
