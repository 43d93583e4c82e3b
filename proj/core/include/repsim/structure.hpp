#pragma once

#include "repsim/sim_matrix.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace repsim {

/// Contiguous segmentation of a model's layers into similarity blocks.
/// boundaries[b] is the 1-based index of the last layer of block b; the
/// final entry always equals the layer count.
struct BlockPartition {
    std::vector<int> boundaries;
    int k = 0;
    std::vector<double> within_mean;  // per-block mean off-diagonal similarity (0 for singletons)
    double between_mean = 0.0;        // mean over all between-block pairs (0 when k == 1)
    double objective = 0.0;
};

/// Best contiguous partition with at most max_blocks blocks under
///   objective = sum_b (block submatrix mean * block size) - penalty * k,
/// the block mean taken over all size^2 entries including the diagonal.
/// Exact dynamic program over split points; ties resolved toward fewer
/// blocks, then the lexicographically smallest boundary list.
BlockPartition segment_blocks(const Eigen::Ref<const Eigen::MatrixXd>& S,
                              int max_blocks, double penalty);

/// score[j] = max_{i<j} S(i,j); the first layer scores 0.
std::vector<double> layer_redundancy(const Eigen::Ref<const Eigen::MatrixXd>& S);

struct CoverageReport {
    double tau = 0.0;
    std::vector<bool> covered;         // per reference layer
    double coverage_fraction = 0.0;
    std::vector<int> uncovered_layers;  // 1-based
};

/// Reference layer i is covered when some column layer reaches similarity
/// tau, tau in (0,1).
CoverageReport coverage(const Eigen::Ref<const Eigen::MatrixXd>& S, double tau);

struct DepthCoverage {
    int depth = 0;
    double reference_covered = 0.0;  // fraction of reference layers covered by the candidate
    double candidate_covered = 0.0;  // fraction of candidate layers covered by the reference
    bool qualifies = false;
};

struct DepthRecommendation {
    std::optional<int> depth;  // nullopt when no candidate qualifies
    double tau = 0.0;
    double min_coverage = 0.0;
    std::vector<DepthCoverage> per_depth;
};

/// Smallest candidate depth whose bidirectional coverage against the
/// reference reaches min_coverage at threshold tau.
DepthRecommendation recommend_depth(const ComparisonGrid& grid, double tau,
                                    double min_coverage);

}  // namespace repsim
