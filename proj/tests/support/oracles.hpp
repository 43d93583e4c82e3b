#pragma once

// Independent reference implementations used to pin expected values.
// Everything here is written directly from the underlying definitions and
// stays off the library's computation paths on purpose.

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <vector>

namespace oracle {

// Entry-wise brute-force linear gram.
inline Eigen::MatrixXd gram_linear(const Eigen::MatrixXd& X) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            double dot = 0.0;
            for (Eigen::Index f = 0; f < X.cols(); ++f) dot += X(i, f) * X(j, f);
            K(i, j) = dot;
        }
    }
    return K;
}

// Double centering through an explicit H = I - (1/n) 11' product.
inline Eigen::MatrixXd center(const Eigen::MatrixXd& K) {
    const Eigen::Index n = K.rows();
    const Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n) -
                              Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    return H * K * H;
}

// Biased HSIC from the centered-gram trace definition.
inline double hsic_biased(const Eigen::MatrixXd& K, const Eigen::MatrixXd& L) {
    const Eigen::Index n = K.rows();
    const Eigen::MatrixXd Kc = center(K);
    const Eigen::MatrixXd Lc = center(L);
    double trace = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) trace += Kc(i, j) * Lc(j, i);
    }
    const double d = static_cast<double>(n - 1);
    return trace / (d * d);
}

// Unbiased HSIC written with explicit ones vectors and matrix products,
// directly from the published U-statistic:
//   (1/(n(n-3))) [tr(Kt Lt) + (1'Kt1)(1'Lt1)/((n-1)(n-2)) - (2/(n-2)) 1'Kt Lt 1]
inline double hsic_unbiased(const Eigen::MatrixXd& K, const Eigen::MatrixXd& L) {
    const Eigen::Index n = K.rows();
    Eigen::MatrixXd Kt = K;
    Eigen::MatrixXd Lt = L;
    Kt.diagonal().setZero();
    Lt.diagonal().setZero();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const double trace = (Kt * Lt).trace();
    const double sum_k = ones.transpose() * Kt * ones;
    const double sum_l = ones.transpose() * Lt * ones;
    const double mixed = ones.transpose() * Kt * Lt * ones;
    const double nd = static_cast<double>(n);
    return (trace + sum_k * sum_l / ((nd - 1.0) * (nd - 2.0)) - 2.0 / (nd - 2.0) * mixed) /
           (nd * (nd - 3.0));
}

inline double cka_biased_linear(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
    const Eigen::MatrixXd K = gram_linear(X);
    const Eigen::MatrixXd L = gram_linear(Y);
    return hsic_biased(K, L) / std::sqrt(hsic_biased(K, K) * hsic_biased(L, L));
}

// Exhaustive search over all contiguous partitions with at most max_blocks
// blocks. Objective definition mirrors the documented contract: block
// submatrix mean (diagonal included) times block size, minus penalty per
// block. Ties: fewest blocks, then lexicographically smallest boundaries.
struct Partition {
    std::vector<int> boundaries;  // 1-based block ends, last == L
    double objective = -std::numeric_limits<double>::infinity();
};

inline double partition_objective(const Eigen::MatrixXd& S, const std::vector<int>& bounds,
                                  double penalty) {
    double total = 0.0;
    int start = 0;
    for (int end : bounds) {
        double sum = 0.0;
        for (int i = start; i < end; ++i) {
            for (int j = start; j < end; ++j) sum += S(i, j);
        }
        total += sum / static_cast<double>(end - start) - penalty;
        start = end;
    }
    return total;
}

inline void enumerate_partitions(int L, int max_blocks, std::vector<int>& current,
                                 std::vector<std::vector<int>>& out) {
    const int start = current.empty() ? 0 : current.back();
    if (start == L) {
        out.push_back(current);
        return;
    }
    if (static_cast<int>(current.size()) == max_blocks) return;
    for (int end = start + 1; end <= L; ++end) {
        current.push_back(end);
        enumerate_partitions(L, max_blocks, current, out);
        current.pop_back();
    }
}

inline Partition best_partition(const Eigen::MatrixXd& S, int max_blocks, double penalty) {
    const int L = static_cast<int>(S.rows());
    std::vector<std::vector<int>> all;
    std::vector<int> current;
    enumerate_partitions(L, max_blocks, current, all);

    Partition best;
    for (const auto& bounds : all) {
        const double objective = partition_objective(S, bounds, penalty);
        bool take = objective > best.objective;
        if (!take && objective == best.objective) {
            if (bounds.size() < best.boundaries.size()) {
                take = true;
            } else if (bounds.size() == best.boundaries.size()) {
                take = std::lexicographical_compare(bounds.begin(), bounds.end(),
                                                    best.boundaries.begin(),
                                                    best.boundaries.end());
            }
        }
        if (take) {
            best.objective = objective;
            best.boundaries = bounds;
        }
    }
    return best;
}

// Normalized 1-D Gaussian kernel, radius ceil(3 sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double v = std::exp(-static_cast<double>(k) * k / (2.0 * sigma * sigma));
        kernel[static_cast<std::size_t>(k + radius)] = v;
        sum += v;
    }
    for (double& v : kernel) v /= sum;
    return kernel;
}

}  // namespace oracle
