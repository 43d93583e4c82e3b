#include "repsim/cka.hpp"
#include "repsim/rng.hpp"

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
    repsim::Rng rng(seed);
    Eigen::MatrixXd m(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) m(i, j) = rng.gaussian();
    }
    return m;
}

void CkaGramPathBiased(benchmark::State& state) {
    const auto n = state.range(0);
    const Eigen::MatrixXd X = random_matrix(n, 128, 1);
    const Eigen::MatrixXd Y = random_matrix(n, 128, 2);
    repsim::CkaConfig cfg;
    cfg.estimator = repsim::HsicEstimator::biased;
    for (auto _ : state) {
        benchmark::DoNotOptimize(repsim::cka(X, Y, cfg));
    }
    state.SetComplexityN(n);
}
BENCHMARK(CkaGramPathBiased)->RangeMultiplier(2)->Range(32, 512)->Complexity();

void CkaGramPathUnbiased(benchmark::State& state) {
    const auto n = state.range(0);
    const Eigen::MatrixXd X = random_matrix(n, 128, 3);
    const Eigen::MatrixXd Y = random_matrix(n, 128, 4);
    repsim::CkaConfig cfg;
    cfg.estimator = repsim::HsicEstimator::unbiased;
    for (auto _ : state) {
        benchmark::DoNotOptimize(repsim::cka(X, Y, cfg));
    }
    state.SetComplexityN(n);
}
BENCHMARK(CkaGramPathUnbiased)->RangeMultiplier(2)->Range(32, 512)->Complexity();

void CkaFeaturePath(benchmark::State& state) {
    const auto p = state.range(0);
    const Eigen::MatrixXd X = random_matrix(64, p, 5);
    const Eigen::MatrixXd Y = random_matrix(64, p, 6);
    for (auto _ : state) {
        benchmark::DoNotOptimize(repsim::cka_linear_feature(X, Y));
    }
    state.SetComplexityN(p);
}
BENCHMARK(CkaFeaturePath)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

void RbfGram(benchmark::State& state) {
    const auto n = state.range(0);
    const Eigen::MatrixXd X = random_matrix(n, 64, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(repsim::gram_rbf(X, 1.0));
    }
    state.SetComplexityN(n);
}
BENCHMARK(RbfGram)->RangeMultiplier(2)->Range(32, 256)->Complexity();

}  // namespace

BENCHMARK_MAIN();
