#include "spo/admm.hpp"
#include "spo/gradcheck.hpp"
#include "spo/relocation.hpp"

#include <benchmark/benchmark.h>

using namespace spo;

namespace {

StandardQP instance_qp(int n) {
    RelocationInstance inst = random_instance(n, 42 + n);
    const Eigen::VectorXd pred = random_prediction(inst, 43 + n);
    return to_standard_qp(inst, required_dv_distribution(inst.target, pred));
}

}  // namespace

static void BM_Factorization(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    StandardQP qp = instance_qp(n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble_penalty_system(qp, 2.0));
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_Factorization)->RangeMultiplier(2)->Range(4, 32)->Complexity();

static void BM_Solve(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    StandardQP qp = instance_qp(n);
    PenaltySystem sys = assemble_penalty_system(qp, 2.0);
    AdmmConfig cfg;  // rho 2.0, xi 0.05
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve(qp, sys, cfg));
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_Solve)->RangeMultiplier(2)->Range(4, 32)->Complexity();

static void BM_SolveWithGradients(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    StandardQP qp = instance_qp(n);
    PenaltySystem sys = assemble_penalty_system(qp, 2.0);
    const Eigen::MatrixXd dq = Eigen::MatrixXd(build_sparse_A(n)).transpose();
    AdmmConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_with_gradients(qp, sys, cfg, dq));
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_SolveWithGradients)->RangeMultiplier(2)->Range(4, 32)->Complexity();

static void BM_TracedSolveAndReverse(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    StandardQP qp = instance_qp(n);
    PenaltySystem sys = assemble_penalty_system(qp, 2.0);
    const Eigen::MatrixXd dq = Eigen::MatrixXd(build_sparse_A(n)).transpose();
    const Eigen::VectorXd dl_dy = Eigen::VectorXd::Ones(qp.n_flow);
    AdmmConfig cfg;
    for (auto _ : state) {
        AdmmTrace trace;
        AdmmResult res = solve_traced(qp, sys, cfg, trace);
        benchmark::DoNotOptimize(reverse_loss_gradient(qp, sys, trace, dl_dy, dq));
        benchmark::DoNotOptimize(res);
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_TracedSolveAndReverse)->RangeMultiplier(2)->Range(4, 32)->Complexity();

BENCHMARK_MAIN();
