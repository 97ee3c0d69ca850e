#include "dqpt/entropy.hpp"
#include "dqpt/geometry.hpp"

#include <benchmark/benchmark.h>

using namespace dqpt;

namespace {

QuenchSpec quench(int twice_j, std::optional<double> beta, double t_max, double dt)
{
    const SpinQuantumNumber j(twice_j);
    return QuenchSpec{LMGParams{0.0, 0.5, 1.0, j}, LMGParams{0.8, 0.5, 1.0, j}, beta,
                      TimeGrid::from_horizon(t_max, dt), InitialState::symmetry_broken};
}

void BM_SOfX(benchmark::State& state)
{
    double x = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(s_of_x(x).s);
        x = x + 0.0137 < 0.999 ? x + 0.0137 : 0.0;
    }
}
BENCHMARK(BM_SOfX);

void BM_DenseDiagonalize(benchmark::State& state)
{
    const auto h = build_lmg_hamiltonian(LMGParams{0.8, 0.5, 1.0, SpinQuantumNumber(static_cast<int>(state.range(0)))});
    for (auto _ : state) {
        benchmark::DoNotOptimize(diagonalize(h).eigenvalues.data());
    }
}
BENCHMARK(BM_DenseDiagonalize)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_PreciseManifold(benchmark::State& state)
{
    const auto q = quench(static_cast<int>(state.range(0)), std::nullopt, 1.0, 0.01);
    for (auto _ : state) {
        benchmark::DoNotOptimize(initial_manifold(q).even_energy);
    }
}
BENCHMARK(BM_PreciseManifold)->Arg(100)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_LoschmidtSeries(benchmark::State& state)
{
    const auto q = quench(static_cast<int>(state.range(0)), std::nullopt, 2.0, 0.01);
    const auto manifold = initial_manifold(q);
    for (auto _ : state) {
        benchmark::DoNotOptimize(loschmidt_series(q, &manifold).rate.back());
    }
}
BENCHMARK(BM_LoschmidtSeries)->Arg(100)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_ThermalRootFidelity(benchmark::State& state)
{
    const SpinQuantumNumber j(static_cast<int>(state.range(0)));
    const ThermalFidelity engine(LMGParams{0.0, 0.5, 1.0, j}, LMGParams{0.8, 0.5, 1.0, j}, 1.0);
    double t = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(engine.root_fidelity(t));
        t += 0.05;
    }
    state.counters["retained"] = engine.retained_states();
}
BENCHMARK(BM_ThermalRootFidelity)->Arg(100)->Arg(600)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
