#include "repsim/structure.hpp"

#include "repsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace repsim {

namespace {

// Sum of the square submatrix S[a..b, a..b] (0-based, inclusive) via 2-D
// prefix sums.
class BlockSums {
public:
    explicit BlockSums(const Eigen::Ref<const Eigen::MatrixXd>& S) {
        const Eigen::Index n = S.rows();
        prefix_ = Eigen::MatrixXd::Zero(n + 1, n + 1);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                prefix_(i + 1, j + 1) =
                    S(i, j) + prefix_(i, j + 1) + prefix_(i + 1, j) - prefix_(i, j);
            }
        }
    }

    double block(Eigen::Index a, Eigen::Index b) const {
        return prefix_(b + 1, b + 1) - prefix_(a, b + 1) - prefix_(b + 1, a) + prefix_(a, a);
    }

private:
    Eigen::MatrixXd prefix_;
};

bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

BlockPartition segment_blocks(const Eigen::Ref<const Eigen::MatrixXd>& S, int max_blocks,
                              double penalty) {
    const Eigen::Index L = S.rows();
    if (L != S.cols()) {
        raise(ErrorKind::shape, "segment_blocks: matrix is " + std::to_string(L) + "x" +
                                    std::to_string(S.cols()) + ", not square");
    }
    if (L < 1) raise(ErrorKind::shape, "segment_blocks: empty matrix");
    if (max_blocks < 1) raise(ErrorKind::argument, "max_blocks must be >= 1");
    if (penalty < 0.0) raise(ErrorKind::argument, "penalty must be >= 0");
    if (!S.allFinite()) raise(ErrorKind::data, "segment_blocks: non-finite similarity values");

    const BlockSums sums(S);
    const int kmax = static_cast<int>(std::min<Eigen::Index>(max_blocks, L));
    // Block contribution: submatrix mean (diagonal included) times block
    // size, i.e. blocksum / size, minus the per-block penalty.
    const auto contrib = [&](Eigen::Index a, Eigen::Index b) {
        return sums.block(a, b) / static_cast<double>(b - a + 1) - penalty;
    };

    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    // best[i][k]: optimal objective for the first i layers in exactly k
    // blocks; bounds[i][k]: its boundary list (1-based block ends).
    std::vector<std::vector<double>> best(L + 1, std::vector<double>(kmax + 1, kNegInf));
    std::vector<std::vector<std::vector<int>>> bounds(
        L + 1, std::vector<std::vector<int>>(kmax + 1));
    best[0][0] = 0.0;

    for (int k = 1; k <= kmax; ++k) {
        for (Eigen::Index i = k; i <= L; ++i) {
            for (Eigen::Index j = k - 1; j < i; ++j) {
                if (best[j][k - 1] == kNegInf) continue;
                const double candidate = best[j][k - 1] + contrib(j, i - 1);
                bool take = candidate > best[i][k];
                if (!take && candidate == best[i][k]) {
                    std::vector<int> cand_bounds = bounds[j][k - 1];
                    cand_bounds.push_back(static_cast<int>(i));
                    take = lex_less(cand_bounds, bounds[i][k]);
                }
                if (take) {
                    best[i][k] = candidate;
                    bounds[i][k] = bounds[j][k - 1];
                    bounds[i][k].push_back(static_cast<int>(i));
                }
            }
        }
    }

    // Ascending k with a strict improvement test resolves objective ties
    // toward fewer blocks.
    int best_k = 1;
    for (int k = 2; k <= kmax; ++k) {
        if (best[L][k] > best[L][best_k]) best_k = k;
    }

    BlockPartition part;
    part.boundaries = bounds[L][best_k];
    part.k = best_k;
    part.objective = best[L][best_k];

    // Reported statistics: off-diagonal within-block means (singletons
    // report 0) and the overall between-block mean.
    int start = 0;
    double between_sum = 0.0;
    std::size_t between_count = 0;
    for (int b = 0; b < part.k; ++b) {
        const int end = part.boundaries[static_cast<std::size_t>(b)];  // 1-based inclusive
        const int size = end - start;
        double within = 0.0;
        if (size > 1) {
            const double total = sums.block(start, end - 1);
            double diag = 0.0;
            for (int i = start; i < end; ++i) diag += S(i, i);
            within = (total - diag) / static_cast<double>(size * (size - 1));
        }
        part.within_mean.push_back(within);
        start = end;
    }
    start = 0;
    for (int b = 0; b < part.k; ++b) {
        const int end = part.boundaries[static_cast<std::size_t>(b)];
        for (int i = start; i < end; ++i) {
            for (int j = 0; j < static_cast<int>(L); ++j) {
                if (j >= start && j < end) continue;
                between_sum += S(i, j);
                ++between_count;
            }
        }
        start = end;
    }
    part.between_mean = between_count > 0 ? between_sum / static_cast<double>(between_count) : 0.0;
    return part;
}

std::vector<double> layer_redundancy(const Eigen::Ref<const Eigen::MatrixXd>& S) {
    const Eigen::Index L = S.rows();
    if (L != S.cols()) raise(ErrorKind::shape, "layer_redundancy: matrix not square");
    std::vector<double> scores(static_cast<std::size_t>(L), 0.0);
    for (Eigen::Index j = 1; j < L; ++j) {
        double best = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < j; ++i) best = std::max(best, S(i, j));
        scores[static_cast<std::size_t>(j)] = best;
    }
    return scores;
}

CoverageReport coverage(const Eigen::Ref<const Eigen::MatrixXd>& S, double tau) {
    if (!(tau > 0.0) || !(tau < 1.0)) {
        raise(ErrorKind::argument, "coverage threshold must lie in (0,1)");
    }
    CoverageReport report;
    report.tau = tau;
    const Eigen::Index L = S.rows();
    int covered_count = 0;
    for (Eigen::Index i = 0; i < L; ++i) {
        const bool hit = S.row(i).maxCoeff() >= tau;
        report.covered.push_back(hit);
        if (hit) {
            ++covered_count;
        } else {
            report.uncovered_layers.push_back(static_cast<int>(i) + 1);
        }
    }
    report.coverage_fraction = L > 0 ? static_cast<double>(covered_count) / static_cast<double>(L) : 0.0;
    return report;
}

DepthRecommendation recommend_depth(const ComparisonGrid& grid, double tau,
                                    double min_coverage) {
    if (grid.cells.empty()) raise(ErrorKind::argument, "recommend_depth: empty grid");
    if (!(tau > 0.0) || !(tau < 1.0)) {
        raise(ErrorKind::argument, "recommend_depth: tau must lie in (0,1)");
    }
    if (!(min_coverage >= 0.0 && min_coverage <= 1.0)) {
        raise(ErrorKind::argument, "recommend_depth: min_coverage must lie in [0,1]");
    }

    DepthRecommendation rec;
    rec.tau = tau;
    rec.min_coverage = min_coverage;
    for (const auto& cell : grid.cells) {
        DepthCoverage dc;
        dc.depth = cell.col_model.depth;
        dc.reference_covered = coverage(cell.values, tau).coverage_fraction;
        const Eigen::MatrixXd transposed = cell.values.transpose();
        dc.candidate_covered = coverage(transposed, tau).coverage_fraction;
        dc.qualifies =
            dc.reference_covered >= min_coverage && dc.candidate_covered >= min_coverage;
        rec.per_depth.push_back(dc);
    }
    std::stable_sort(rec.per_depth.begin(), rec.per_depth.end(),
                     [](const DepthCoverage& a, const DepthCoverage& b) {
                         return a.depth < b.depth;
                     });
    for (const auto& dc : rec.per_depth) {
        if (dc.qualifies) {
            rec.depth = dc.depth;
            break;
        }
    }
    return rec;
}

}  // namespace repsim
