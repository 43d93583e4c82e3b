#include "repsim/gram.hpp"

#include "repsim/error.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

using namespace repsim;

TEST_CASE("gram_linear on orthonormal and identical rows") {
    Eigen::MatrixXd eye(2, 2);
    eye << 1, 0, 0, 1;
    CHECK(gram_linear(eye).values.isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-15));

    Eigen::MatrixXd same(2, 2);
    same << 1, 1, 1, 1;
    CHECK(gram_linear(same).values.isApproxToConstant(2.0, 1e-15));
}

TEST_CASE("gram_linear matches the brute-force dot-product oracle") {
    const Eigen::MatrixXd X = testutil::random_matrix(6, 3, 42);
    const GramMatrix K = gram_linear(X);
    const Eigen::MatrixXd expected = oracle::gram_linear(X);
    CHECK((K.values - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_FALSE(K.centered);
}

TEST_CASE("gram_linear is PSD for random inputs") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const Eigen::MatrixXd X = testutil::random_matrix(10, 4, 100 + seed);
        const GramMatrix K = gram_linear(X);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K.values);
        CHECK(eig.eigenvalues().minCoeff() > -1e-8);
        CHECK((K.values - K.values.transpose()).cwiseAbs().maxCoeff() <
              1e-10 * K.values.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("gram_rbf has unit diagonal and values in (0,1]") {
    const Eigen::MatrixXd X = testutil::random_matrix(12, 5, 7);
    const GramMatrix K = gram_rbf(X, 1.0);
    for (Eigen::Index i = 0; i < K.n(); ++i) CHECK(K.values(i, i) == 1.0);
    CHECK(K.values.minCoeff() > 0.0);
    CHECK(K.values.maxCoeff() <= 1.0);
    CHECK(K.sigma.has_value());
}

TEST_CASE("gram_rbf is PSD for random inputs") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const Eigen::MatrixXd X = testutil::random_matrix(10, 4, 300 + seed);
        const GramMatrix K = gram_rbf(X, 1.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K.values);
        CHECK(eig.eigenvalues().minCoeff() > -1e-8);
    }
}

TEST_CASE("gram_rbf two-point configuration hits exp(-1/2)") {
    Eigen::MatrixXd X(2, 1);
    X << 0.0, 3.0;  // single pair, median distance d = 3, sigma_frac 1 -> sigma = d
    const GramMatrix K = gram_rbf(X, 1.0);
    CHECK(K.values(0, 1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK(K.sigma.value() == doctest::Approx(3.0));
}

TEST_CASE("gram_rbf rejects identical rows (degenerate bandwidth)") {
    Eigen::MatrixXd X(2, 1);
    X << 0.0, 0.0;
    try {
        gram_rbf(X, 1.0);
        FAIL("expected degenerate error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::degenerate);
    }
}

TEST_CASE("gram_rbf decreases with pairwise distance") {
    Eigen::MatrixXd X(4, 1);
    X << 0.0, 1.0, 3.0, 7.0;
    const GramMatrix K = gram_rbf(X, 1.0);
    CHECK(K.values(0, 1) > K.values(0, 2));
    CHECK(K.values(0, 2) > K.values(0, 3));
}

TEST_CASE("median_pairwise_distance odd and even pair counts") {
    Eigen::MatrixXd three(3, 1);
    three << 0.0, 1.0, 3.0;  // distances 1, 2, 3
    CHECK(median_pairwise_distance(three) == doctest::Approx(2.0));

    Eigen::MatrixXd four(4, 1);
    four << 0.0, 1.0, 2.0, 10.0;  // distances 1,1,2,8,9,10 -> (2+8)/2
    CHECK(median_pairwise_distance(four) == doctest::Approx(5.0));
}

TEST_CASE("center_gram of the 2x2 identity") {
    GramMatrix K;
    K.values = Eigen::MatrixXd::Identity(2, 2);
    const GramMatrix C = center_gram(K);
    Eigen::MatrixXd expected(2, 2);
    expected << 0.5, -0.5, -0.5, 0.5;
    CHECK((C.values - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(C.centered);
}

TEST_CASE("center_gram annihilates constant matrices") {
    GramMatrix K;
    K.values = Eigen::MatrixXd::Constant(5, 5, 3.7);
    CHECK(center_gram(K).values.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("center_gram is idempotent and matches explicit HKH") {
    for (Eigen::Index n : {2, 3, 8, 17, 32}) {
        const Eigen::MatrixXd X = testutil::random_matrix(n, 4, 55 + static_cast<std::uint64_t>(n));
        GramMatrix K = gram_linear(X);
        const GramMatrix once = center_gram(K);
        const GramMatrix twice = center_gram(once);
        CHECK((twice.values - once.values).cwiseAbs().maxCoeff() < 1e-12);

        const Eigen::MatrixXd explicit_hkh = oracle::center(K.values);
        CHECK((once.values - explicit_hkh).cwiseAbs().maxCoeff() < 1e-10);

        // Row and column sums vanish.
        const double scale =
            1e-8 * static_cast<double>(n) * K.values.cwiseAbs().maxCoeff();
        CHECK(once.values.rowwise().sum().cwiseAbs().maxCoeff() <= scale);
        CHECK(once.values.colwise().sum().cwiseAbs().maxCoeff() <= scale);
    }
}

TEST_CASE("gram ops reject bad inputs") {
    Eigen::MatrixXd one_row(1, 3);
    one_row << 1, 2, 3;
    CHECK_THROWS_AS(gram_linear(one_row), Error);

    Eigen::MatrixXd with_nan(2, 2);
    with_nan << 1, 2, 3, std::numeric_limits<double>::quiet_NaN();
    try {
        gram_linear(with_nan);
        FAIL("expected data error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::data);
    }

    const Eigen::MatrixXd X = testutil::random_matrix(4, 2, 1);
    CHECK_THROWS_AS(gram_rbf(X, 0.0), Error);
    CHECK_THROWS_AS(gram_rbf(X, -1.0), Error);
}
