#include "repsim/cka.hpp"

#include "repsim/error.hpp"

#include <cmath>
#include <string>

namespace repsim {

const char* to_string(HsicEstimator e) noexcept {
    return e == HsicEstimator::biased ? "biased" : "unbiased";
}

HsicEstimator estimator_from_string(const std::string& s) {
    if (s == "biased") return HsicEstimator::biased;
    if (s == "unbiased") return HsicEstimator::unbiased;
    raise(ErrorKind::argument, "unknown estimator '" + s + "'");
}

void CkaConfig::check() const {
    if (!(sigma_frac > 0.0)) raise(ErrorKind::argument, "sigma_frac must be > 0");
    if (minibatch_size) {
        if (*minibatch_size < 4) {
            raise(ErrorKind::argument, "minibatch_size must be >= 4");
        }
        if (estimator != HsicEstimator::unbiased) {
            raise(ErrorKind::argument, "minibatch mode requires the unbiased estimator");
        }
    }
}

double hsic_biased(const GramMatrix& K, const GramMatrix& L) {
    const Eigen::Index n = K.n();
    if (n != L.n()) {
        raise(ErrorKind::shape, "hsic_biased: gram sizes differ (" + std::to_string(n) +
                                    " vs " + std::to_string(L.n()) + ")");
    }
    if (n < 2) raise(ErrorKind::shape, "hsic_biased needs n >= 2");
    const GramMatrix Kc = K.centered ? K : center_gram(K);
    const GramMatrix Lc = L.centered ? L : center_gram(L);
    // tr(Kc Lc) over symmetric matrices.
    const double trace = (Kc.values.array() * Lc.values.array()).sum();
    const double denom = static_cast<double>(n - 1) * static_cast<double>(n - 1);
    return trace / denom;
}

double hsic_unbiased(const GramMatrix& K, const GramMatrix& L) {
    const Eigen::Index n = K.n();
    if (n != L.n()) {
        raise(ErrorKind::shape, "hsic_unbiased: gram sizes differ (" + std::to_string(n) +
                                    " vs " + std::to_string(L.n()) + ")");
    }
    if (n < 4) {
        raise(ErrorKind::insufficient_samples,
              "hsic_unbiased needs n >= 4, got " + std::to_string(n));
    }

    // U-statistic over grams with zeroed diagonals.
    double trace = 0.0;       // tr(Kt Lt)
    double sum_k = 0.0;       // 1' Kt 1
    double sum_l = 0.0;       // 1' Lt 1
    double row_dot = 0.0;     // 1' Kt Lt 1 accumulated as <Kt 1, Lt 1>
    Eigen::VectorXd krow = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd lrow = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double k = K.values(i, j);
            const double l = L.values(i, j);
            trace += k * l;
            krow(i) += k;
            lrow(i) += l;
        }
    }
    sum_k = krow.sum();
    sum_l = lrow.sum();
    row_dot = krow.dot(lrow);

    const double nd = static_cast<double>(n);
    const double value = trace + sum_k * sum_l / ((nd - 1.0) * (nd - 2.0)) -
                         2.0 / (nd - 2.0) * row_dot;
    return value / (nd * (nd - 3.0));
}

namespace {

bool rows_identical(const Eigen::Ref<const Eigen::MatrixXd>& X) {
    for (Eigen::Index i = 1; i < X.rows(); ++i) {
        if ((X.row(i).array() != X.row(0).array()).any()) return false;
    }
    return true;
}

GramMatrix build_gram(const Eigen::Ref<const Eigen::MatrixXd>& X, const CkaConfig& cfg) {
    return cfg.kernel == KernelKind::linear ? gram_linear(X) : gram_rbf(X, cfg.sigma_frac);
}

double hsic(const GramMatrix& K, const GramMatrix& L, HsicEstimator estimator) {
    return estimator == HsicEstimator::biased ? hsic_biased(K, L) : hsic_unbiased(K, L);
}

double normalize_hsic(double hxy, double hxx, double hyy) {
    if (!(hxx > 0.0) || !(hyy > 0.0)) {
        raise(ErrorKind::degenerate,
              "cka: zero self-HSIC (constant or degenerate representation)");
    }
    const double value = hxy / std::sqrt(hxx * hyy);
    if (!std::isfinite(value)) {
        raise(ErrorKind::degenerate, "cka: non-finite score from degenerate input");
    }
    return value;
}

std::vector<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> chunk_rows(
    const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::MatrixXd>& Y,
    int batch) {
    std::vector<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> out;
    const Eigen::Index n = X.rows();
    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index len = std::min<Eigen::Index>(batch, n - start);
        // A short tail (< 4 rows) folds into the previous batch.
        if (n - start - len > 0 && n - start - len < 4) len = n - start;
        out.emplace_back(X.middleRows(start, len), Y.middleRows(start, len));
        start += len;
    }
    return out;
}

}  // namespace

double cka(const Eigen::Ref<const Eigen::MatrixXd>& X,
           const Eigen::Ref<const Eigen::MatrixXd>& Y, const CkaConfig& cfg) {
    cfg.check();
    if (X.rows() != Y.rows()) {
        raise(ErrorKind::shape, "cka: example counts differ (" + std::to_string(X.rows()) +
                                    " vs " + std::to_string(Y.rows()) + ")");
    }
    if (!X.allFinite() || !Y.allFinite()) raise(ErrorKind::data, "cka: non-finite input");
    if (rows_identical(X) || rows_identical(Y)) {
        raise(ErrorKind::degenerate, "cka: all examples identical (constant representation)");
    }
    if (cfg.minibatch_size) {
        const auto batches = chunk_rows(X, Y, *cfg.minibatch_size);
        return minibatch_cka(batches, cfg);
    }
    const GramMatrix K = build_gram(X, cfg);
    const GramMatrix L = build_gram(Y, cfg);
    const double hxy = hsic(K, L, cfg.estimator);
    const double hxx = hsic(K, K, cfg.estimator);
    const double hyy = hsic(L, L, cfg.estimator);
    return normalize_hsic(hxy, hxx, hyy);
}

double cka_linear_feature(const Eigen::Ref<const Eigen::MatrixXd>& X,
                          const Eigen::Ref<const Eigen::MatrixXd>& Y) {
    if (X.rows() != Y.rows()) {
        raise(ErrorKind::shape, "cka_linear_feature: example counts differ");
    }
    if (!X.allFinite() || !Y.allFinite()) {
        raise(ErrorKind::data, "cka_linear_feature: non-finite input");
    }
    const Eigen::MatrixXd Xc = X.rowwise() - X.colwise().mean();
    const Eigen::MatrixXd Yc = Y.rowwise() - Y.colwise().mean();
    const double cross = (Yc.transpose() * Xc).squaredNorm();
    const double xx = (Xc.transpose() * Xc).norm();
    const double yy = (Yc.transpose() * Yc).norm();
    if (!(xx > 0.0) || !(yy > 0.0)) {
        raise(ErrorKind::degenerate,
              "cka_linear_feature: constant representation (zero centered norm)");
    }
    return cross / (xx * yy);
}

double minibatch_cka(std::span<const std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> batches,
                     const CkaConfig& cfg) {
    if (batches.empty()) raise(ErrorKind::argument, "minibatch_cka: no batches");
    if (cfg.estimator != HsicEstimator::unbiased) {
        raise(ErrorKind::argument, "minibatch_cka requires the unbiased estimator");
    }
    const Eigen::Index p = batches.front().first.cols();
    const Eigen::Index q = batches.front().second.cols();

    double sum_xy = 0.0, sum_xx = 0.0, sum_yy = 0.0;
    for (const auto& [xb, yb] : batches) {
        if (xb.rows() != yb.rows()) {
            raise(ErrorKind::shape, "minibatch_cka: batch example counts differ");
        }
        if (xb.rows() < 4) {
            raise(ErrorKind::insufficient_samples,
                  "minibatch_cka: batch of " + std::to_string(xb.rows()) + " examples (< 4)");
        }
        if (xb.cols() != p || yb.cols() != q) {
            raise(ErrorKind::shape, "minibatch_cka: feature dimensions differ across batches");
        }
        CkaConfig batch_cfg = cfg;
        batch_cfg.minibatch_size.reset();
        const GramMatrix K = build_gram(xb, batch_cfg);
        const GramMatrix L = build_gram(yb, batch_cfg);
        sum_xy += hsic_unbiased(K, L);
        sum_xx += hsic_unbiased(K, K);
        sum_yy += hsic_unbiased(L, L);
    }
    const double m = static_cast<double>(batches.size());
    return normalize_hsic(sum_xy / m, sum_xx / m, sum_yy / m);
}

double pearson_r(const Eigen::Ref<const Eigen::VectorXd>& a,
                 const Eigen::Ref<const Eigen::VectorXd>& b) {
    if (a.size() != b.size()) raise(ErrorKind::shape, "pearson_r: lengths differ");
    if (a.size() < 2) raise(ErrorKind::shape, "pearson_r needs length >= 2");
    const Eigen::VectorXd ac = a.array() - a.mean();
    const Eigen::VectorXd bc = b.array() - b.mean();
    const double na = ac.norm();
    const double nb = bc.norm();
    if (!(na > 0.0) || !(nb > 0.0)) {
        raise(ErrorKind::degenerate, "pearson_r: zero-variance waveform");
    }
    return ac.dot(bc) / (na * nb);
}

}  // namespace repsim
