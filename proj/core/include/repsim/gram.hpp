#pragma once

#include <Eigen/Dense>

#include <optional>

namespace repsim {

enum class KernelKind { linear, rbf };

const char* to_string(KernelKind kind) noexcept;
KernelKind kernel_from_string(const std::string& s);

/// Pairwise kernel evaluations over n examples. Symmetric and PSD for both
/// supported kernels; `centered` marks double-centered matrices.
struct GramMatrix {
    Eigen::MatrixXd values;
    KernelKind kernel = KernelKind::linear;
    std::optional<double> sigma;  // rbf bandwidth actually used
    bool centered = false;

    Eigen::Index n() const { return values.rows(); }
};

/// K[i][j] = <X.row(i), X.row(j)>.
GramMatrix gram_linear(const Eigen::Ref<const Eigen::MatrixXd>& X);

/// K[i][j] = exp(-||xi - xj||^2 / (2 sigma^2)), sigma = sigma_frac * median
/// pairwise distance over distinct pairs. Diagonal is exactly 1.
/// A zero median distance is a degenerate bandwidth and raises.
GramMatrix gram_rbf(const Eigen::Ref<const Eigen::MatrixXd>& X, double sigma_frac);

/// Double centering H K H computed as K - rowmean - colmean + grandmean.
/// Idempotent up to floating point.
GramMatrix center_gram(const GramMatrix& K);

/// Median Euclidean distance over the n(n-1)/2 distinct row pairs
/// (midpoint of the two central order statistics for even counts).
double median_pairwise_distance(const Eigen::Ref<const Eigen::MatrixXd>& X);

}  // namespace repsim
