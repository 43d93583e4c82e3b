#include "repsim/rng.hpp"
#include "repsim/sim_matrix.hpp"
#include "repsim/structure.hpp"
#include "repsim/synth.hpp"

#include <benchmark/benchmark.h>

namespace {

Eigen::MatrixXd random_similarity(int L, std::uint64_t seed) {
    repsim::Rng rng(seed);
    Eigen::MatrixXd S(L, L);
    for (int i = 0; i < L; ++i) {
        for (int j = i; j < L; ++j) {
            const double v = rng.uniform01();
            S(i, j) = v;
            S(j, i) = v;
        }
        S(i, i) = 1.0;
    }
    return S;
}

void SegmentBlocksDP(benchmark::State& state) {
    const int L = static_cast<int>(state.range(0));
    const Eigen::MatrixXd S = random_similarity(L, 11);
    for (auto _ : state) {
        benchmark::DoNotOptimize(repsim::segment_blocks(S, 4, 0.05));
    }
    state.SetComplexityN(L);
}
BENCHMARK(SegmentBlocksDP)->RangeMultiplier(2)->Range(8, 128)->Complexity();

void SelfSimilarityMap(benchmark::State& state) {
    const int L = static_cast<int>(state.range(0));
    repsim::PlantedSpec spec;
    spec.n_examples = 128;
    spec.feature_dim = 16;
    spec.layer_count = L;
    spec.block_boundaries = {L / 2, L};
    spec.noise_sigma = 0.05;
    spec.seed = 21;
    const repsim::ActivationSet set = repsim::planted_block_activations(spec);
    repsim::CkaConfig cfg;
    cfg.estimator = repsim::HsicEstimator::biased;
    for (auto _ : state) {
        benchmark::DoNotOptimize(repsim::self_similarity(set, cfg));
    }
    state.SetComplexityN(L);
}
BENCHMARK(SelfSimilarityMap)->RangeMultiplier(2)->Range(4, 16)->Complexity();

void LayerRedundancyScan(benchmark::State& state) {
    const int L = static_cast<int>(state.range(0));
    const Eigen::MatrixXd S = random_similarity(L, 31);
    for (auto _ : state) {
        benchmark::DoNotOptimize(repsim::layer_redundancy(S));
    }
}
BENCHMARK(LayerRedundancyScan)->Arg(16)->Arg(64)->Arg(256);

}  // namespace
