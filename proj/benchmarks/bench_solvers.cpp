#include "bsvie/analysis.hpp"
#include "bsvie/constants.hpp"
#include "bsvie/presets.hpp"

#include <benchmark/benchmark.h>

using namespace bsvie;

namespace {

Problem preset(const char* name, std::size_t steps, WorldChoice world = WorldChoice::preset_default,
               std::size_t paths = 10000) {
    PresetParams pp;
    pp.steps = steps;
    pp.world = world;
    pp.n_paths = paths;
    return build_preset(name, pp);
}

void BM_DeltaStar(benchmark::State& state) {
    const JumpBound f(0.01);
    double beta = 100.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_delta_star(beta, f));
        beta = beta < 1e5 ? beta * 1.01 : 100.0;
    }
}
BENCHMARK(BM_DeltaStar);

void BM_MinBetaType2(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(min_beta(Condition::type2, JumpBound(0.0)).beta);
    }
}
BENCHMARK(BM_MinBetaType2)->Unit(benchmark::kMillisecond);

void BM_TreeRepresentation(benchmark::State& state) {
    const Problem pr = preset("lipschitz-standard", static_cast<std::size_t>(state.range(0)));
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    for (auto _ : state) {
        benchmark::DoNotOptimize(represent(*proj, pr.phi.phi.back(), w.steps(), 0));
    }
    state.counters["leaves"] = static_cast<double>(w.atoms(w.steps()));
}
BENCHMARK(BM_TreeRepresentation)->DenseRange(3, 6)->Unit(benchmark::kMicrosecond);

void BM_RegressionStep(benchmark::State& state) {
    const Problem pr = preset("lipschitz-standard", 8, WorldChoice::ensemble, static_cast<std::size_t>(state.range(0)));
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    for (auto _ : state) {
        benchmark::DoNotOptimize(proj->step(pr.phi.phi.back(), 4));
    }
}
BENCHMARK(BM_RegressionStep)->RangeMultiplier(4)->Range(1 << 10, 1 << 14)->Unit(benchmark::kMicrosecond);

void BM_SolveBSDE(benchmark::State& state) {
    const Problem pr = preset("girsanov-drift", static_cast<std::size_t>(state.range(0)));
    const auto proj = make_projector(*pr.world);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_bsde(pr.phi.phi.back(), pr.f, *pr.world, *proj));
    }
}
BENCHMARK(BM_SolveBSDE)->DenseRange(4, 6)->Unit(benchmark::kMicrosecond);

void BM_PicardType1(benchmark::State& state) {
    const Problem pr = preset("lipschitz-standard", static_cast<std::size_t>(state.range(0)));
    const auto proj = make_projector(*pr.world);
    for (auto _ : state) {
        benchmark::DoNotOptimize(picard_type1(pr.phi, pr.f, *pr.world, *proj));
    }
}
BENCHMARK(BM_PicardType1)->DenseRange(3, 5)->Unit(benchmark::kMillisecond);

void BM_PicardODE(benchmark::State& state) {
    const Problem pr = preset("ode-exp", static_cast<std::size_t>(state.range(0)));
    const auto proj = make_projector(*pr.world);
    for (auto _ : state) {
        benchmark::DoNotOptimize(picard_type1(pr.phi, pr.f, *pr.world, *proj));
    }
}
BENCHMARK(BM_PicardODE)->Arg(125)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_SolveType2(benchmark::State& state) {
    const Problem pr = preset("type2-linear", static_cast<std::size_t>(state.range(0)));
    const auto proj = make_projector(*pr.world);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_type2(pr.phi, pr.f, *pr.world, *proj));
    }
}
BENCHMARK(BM_SolveType2)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
