#pragma once

#include "repsim/gram.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <utility>

namespace repsim {

enum class HsicEstimator { biased, unbiased };

const char* to_string(HsicEstimator e) noexcept;
HsicEstimator estimator_from_string(const std::string& s);

struct CkaConfig {
    KernelKind kernel = KernelKind::linear;
    HsicEstimator estimator = HsicEstimator::unbiased;
    double sigma_frac = 1.0;                // rbf only
    std::optional<int> minibatch_size;      // >= 4; requires unbiased estimator

    void check() const;  // raises argument error on violations
};

/// tr(Kc Lc) / (n-1)^2 with Kc, Lc double-centered.
double hsic_biased(const GramMatrix& K, const GramMatrix& L);

/// Song et al. U-statistic over grams with zeroed diagonals; needs n >= 4.
/// May be slightly negative.
double hsic_unbiased(const GramMatrix& K, const GramMatrix& L);

/// Normalized similarity HSIC(K,L) / sqrt(HSIC(K,K) HSIC(L,L)) of two
/// representations of the same examples. Biased results land in [0,1];
/// unbiased results are reported raw and may be slightly negative.
/// Constant representations raise a degenerate error.
double cka(const Eigen::Ref<const Eigen::MatrixXd>& X,
           const Eigen::Ref<const Eigen::MatrixXd>& Y,
           const CkaConfig& cfg = {});

/// Feature-space form of linear biased CKA:
/// ||Yc' Xc||_F^2 / (||Xc' Xc||_F ||Yc' Yc||_F) on column-centered inputs.
/// Agrees with the Gram path within 1e-8; cheaper when p, q << n.
double cka_linear_feature(const Eigen::Ref<const Eigen::MatrixXd>& X,
                          const Eigen::Ref<const Eigen::MatrixXd>& Y);

/// Minibatch CKA: per-batch unbiased HSIC terms averaged before
/// normalization. A single batch reduces exactly to full-batch cka.
double minibatch_cka(
    std::span<const std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> batches,
    const CkaConfig& cfg = {});

/// Sample Pearson correlation of two equal-length waveforms.
double pearson_r(const Eigen::Ref<const Eigen::VectorXd>& a,
                 const Eigen::Ref<const Eigen::VectorXd>& b);

}  // namespace repsim
