#include "repsim/gram.hpp"

#include "repsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace repsim {

const char* to_string(KernelKind kind) noexcept {
    return kind == KernelKind::linear ? "linear" : "rbf";
}

KernelKind kernel_from_string(const std::string& s) {
    if (s == "linear") return KernelKind::linear;
    if (s == "rbf") return KernelKind::rbf;
    raise(ErrorKind::argument, "unknown kernel '" + s + "'");
}

GramMatrix gram_linear(const Eigen::Ref<const Eigen::MatrixXd>& X) {
    if (X.rows() < 2) raise(ErrorKind::shape, "gram_linear needs n >= 2");
    if (!X.allFinite()) raise(ErrorKind::data, "gram_linear: non-finite input");
    GramMatrix K;
    K.kernel = KernelKind::linear;
    K.values.noalias() = X * X.transpose();
    return K;
}

double median_pairwise_distance(const Eigen::Ref<const Eigen::MatrixXd>& X) {
    const Eigen::Index n = X.rows();
    if (n < 2) raise(ErrorKind::shape, "median_pairwise_distance needs n >= 2");
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            dists.push_back((X.row(i) - X.row(j)).norm());
        }
    }
    std::sort(dists.begin(), dists.end());
    const std::size_t m = dists.size();
    if (m % 2 == 1) return dists[m / 2];
    return 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
}

GramMatrix gram_rbf(const Eigen::Ref<const Eigen::MatrixXd>& X, double sigma_frac) {
    if (X.rows() < 2) raise(ErrorKind::shape, "gram_rbf needs n >= 2");
    if (!X.allFinite()) raise(ErrorKind::data, "gram_rbf: non-finite input");
    if (!(sigma_frac > 0.0)) raise(ErrorKind::argument, "sigma_frac must be > 0");

    const double median = median_pairwise_distance(X);
    if (median <= 0.0) {
        raise(ErrorKind::degenerate,
              "gram_rbf: median pairwise distance is 0 (degenerate bandwidth)");
    }
    const double sigma = sigma_frac * median;
    const double inv = 1.0 / (2.0 * sigma * sigma);

    const Eigen::Index n = X.rows();
    GramMatrix K;
    K.kernel = KernelKind::rbf;
    K.sigma = sigma;
    K.values.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K.values(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d2 = (X.row(i) - X.row(j)).squaredNorm();
            const double v = std::exp(-d2 * inv);
            K.values(i, j) = v;
            K.values(j, i) = v;
        }
    }
    return K;
}

GramMatrix center_gram(const GramMatrix& K) {
    const Eigen::Index n = K.values.rows();
    if (n != K.values.cols()) raise(ErrorKind::shape, "center_gram: matrix not square");

    // K - rowmean - colmean + grandmean; equals H K H without forming H.
    const Eigen::VectorXd row_means = K.values.rowwise().mean();
    const Eigen::RowVectorXd col_means = K.values.colwise().mean();
    const double grand = K.values.mean();

    GramMatrix out;
    out.kernel = K.kernel;
    out.sigma = K.sigma;
    out.centered = true;
    out.values = K.values;
    out.values.colwise() -= row_means;
    out.values.rowwise() -= col_means;
    out.values.array() += grand;
    return out;
}

}  // namespace repsim
