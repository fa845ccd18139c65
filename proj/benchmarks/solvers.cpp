#include "epd/manufactured.hpp"
#include "epd/stepper.hpp"
#include "epd/sylvester.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

namespace {

// First coupled system of the manufactured run at resolution J.
epd::CoupledProblem first_step(int J) {
    epd::GridSpec spec;
    spec.J = J;
    spec.n_steps = 2;
    const epd::Grid grid = epd::build_grid(spec);
    const epd::ProblemDef prob = epd::manufactured_problem({}, epd::SeedMode::exact);
    const epd::OperatorSet opset = epd::build_operator_set(grid, prob.lambda, prob.gamma);
    auto [s0, s1] = epd::init_levels(prob, grid, opset);
    const auto ops = epd::assemble_step_operators(opset, grid, 1, grid.alpha(), prob.a);
    auto [C1, C2] = epd::assemble_rhs(s1, s0, ops, opset, prob, grid);
    return epd::step_problem(ops, std::move(C1), std::move(C2));
}

void BM_SylvesterSolve(benchmark::State& state) {
    const auto p = first_step(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(epd::solve_coupled(p));
    }
}
BENCHMARK(BM_SylvesterSolve)->Arg(9)->Arg(24)->Arg(49)->Arg(99)->Unit(benchmark::kMillisecond);

void BM_KroneckerSolve(benchmark::State& state) {
    const auto p = first_step(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(epd::kronecker_solve(p));
    }
}
BENCHMARK(BM_KroneckerSolve)->Arg(9)->Arg(24)->Arg(49)->Unit(benchmark::kMillisecond);

void BM_ManufacturedRun(benchmark::State& state) {
    epd::GridSpec spec;
    spec.J = static_cast<int>(state.range(0));
    const double h = (spec.L1 - spec.L0) / (spec.J + 1);
    spec.n_steps = epd::steps_to_reach(0.0, 1.0, h * std::sqrt(h));
    const epd::ProblemDef prob = epd::manufactured_problem({}, epd::SeedMode::exact);
    epd::RunOptions opts;
    opts.compute_margin = false;
    for (auto _ : state) {
        benchmark::DoNotOptimize(epd::run(prob, spec, opts));
    }
}
BENCHMARK(BM_ManufacturedRun)->Arg(24)->Arg(49)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
