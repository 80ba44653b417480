// Serial reference vs OpenMP path of the data-parallel kernels.

#include <benchmark/benchmark.h>

#include "msfem/snapshot.hpp"
#include "msfem/spectral.hpp"
#include "msfem/transport.hpp"

namespace {

using msfem::Execution;

void snapshots(benchmark::State& state, Execution exec)
{
    const int n = static_cast<int>(state.range(0));
    const msfem::GridHierarchy grid(n, n / 10);
    const auto kappa = msfem::synthetic_field(n, 7, 1e4);
    const msfem::BlockSolvers blocks(grid, kappa, exec);
    for (auto _ : state)
        benchmark::DoNotOptimize(msfem::build_snapshot_space(blocks, exec).size());
}

void spectra(benchmark::State& state, Execution exec)
{
    const int n = static_cast<int>(state.range(0));
    const msfem::GridHierarchy grid(n, n / 10);
    const auto kappa = msfem::synthetic_field(n, 7, 1e4);
    const auto system = msfem::assemble(grid, kappa);
    const msfem::BlockSolvers blocks(grid, kappa, exec);
    const auto snap = msfem::build_snapshot_space(blocks, exec);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            msfem::compute_spectra(msfem::SpectralKind::spectral1, system, snap.blocks, exec).size());
}

void upwind(benchmark::State& state, Execution exec)
{
    const int n = static_cast<int>(state.range(0));
    const msfem::GridHierarchy grid(n, n / 10);
    const auto kappa = msfem::synthetic_field(n, 7, 1e4);
    const auto flux = msfem::solve_global(msfem::assemble(grid, kappa), msfem::corner_source(grid)).flux;
    const auto rate = msfem::corner_rate(grid);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(grid.num_cells());
    const double dt = msfem::cfl_dt(grid, flux, 0.5);
    const msfem::FluidModel model;
    for (auto _ : state) {
        s = msfem::step_two_phase(grid, s, flux, rate, dt / model.max_dF(), model, exec);
        benchmark::DoNotOptimize(s.data());
    }
}

} // namespace

BENCHMARK_CAPTURE(snapshots, serial, Execution::serial)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(snapshots, parallel, Execution::parallel)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(spectra, serial, Execution::serial)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(spectra, parallel, Execution::parallel)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(upwind, serial, Execution::serial)->Arg(100)->Arg(200);
BENCHMARK_CAPTURE(upwind, parallel, Execution::parallel)->Arg(100)->Arg(200);

BENCHMARK_MAIN();
