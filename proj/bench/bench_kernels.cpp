#include "inls/kernels.hpp"
#include "inls/operator.hpp"
#include "inls/riesz.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace inls;
using kernels::Exec;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(1) ? Exec::Parallel : Exec::Serial; }

void set_label(benchmark::State& state) {
    state.SetLabel(state.range(1) ? "parallel x" + std::to_string(kernels::max_threads()) : "serial");
}

Eigen::VectorXd random_vector(int n) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> d;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = d(rng);
    return v;
}

void BM_matvec(benchmark::State& state) {
    const int M = static_cast<int>(state.range(0));
    kernels::RowMatrix A = kernels::RowMatrix::Random(M, M);
    const Eigen::VectorXd x = random_vector(M);
    Eigen::VectorXd y(M);
    for (auto _ : state) {
        kernels::matvec(A, x, y, exec_of(state));
        benchmark::DoNotOptimize(y.data());
    }
    set_label(state);
}

void BM_spectral_propagate(benchmark::State& state) {
    const int M = static_cast<int>(state.range(0));
    const OperatorFactorization f = factorize_K(KOperator(1, 0.0, make_grid(M, 12.0, 3)));
    Eigen::VectorXcd u = random_vector(M).cast<std::complex<double>>();
    for (auto _ : state) {
        kernels::spectral_propagate(f.Q, f.Qt, f.eigenvalues, f.sqrt_w, 1e-3, u, exec_of(state));
        benchmark::DoNotOptimize(u.data());
    }
    set_label(state);
}

void BM_riesz_assembly(benchmark::State& state) {
    const GridPtr g = make_grid(static_cast<int>(state.range(0)), 12.0, 3);
    for (auto _ : state) {
        RieszKernel k(g, 2.0, exec_of(state));
        benchmark::DoNotOptimize(k.matrix().data());
    }
    set_label(state);
}

void BM_riesz_apply(benchmark::State& state) {
    const GridPtr g = make_grid(static_cast<int>(state.range(0)), 12.0, 3);
    const RieszKernel k(g, 2.0);
    const Eigen::VectorXd x = random_vector(g->M);
    for (auto _ : state) benchmark::DoNotOptimize(k.apply(x, exec_of(state)).data());
    set_label(state);
}

}  // namespace

BENCHMARK(BM_matvec)->ArgsProduct({{256, 1024, 4096}, {0, 1}});
BENCHMARK(BM_spectral_propagate)->ArgsProduct({{256, 1024}, {0, 1}});
BENCHMARK(BM_riesz_assembly)->ArgsProduct({{128, 256}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_riesz_apply)->ArgsProduct({{256, 1024}, {0, 1}});

BENCHMARK_MAIN();
