#include "repsim/sim_matrix.hpp"

#include "repsim/error.hpp"
#include "repsim/synth.hpp"
#include "support/helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>

using namespace repsim;

namespace {

CkaConfig biased_linear() {
    CkaConfig cfg;
    cfg.estimator = HsicEstimator::biased;
    return cfg;
}

}  // namespace

TEST_CASE("self_similarity: identical layers score 1, diagonal is 1") {
    const Eigen::MatrixXd base = testutil::random_matrix(16, 5, 1);
    const ActivationSet set =
        testutil::make_set({testutil::random_matrix(16, 4, 2), base, base});
    const SimilarityMatrix S = self_similarity(set, biased_linear());
    REQUIRE(S.values.rows() == 3);
    CHECK(S.values(1, 2) == doctest::Approx(1.0).epsilon(1e-9));
    for (int i = 0; i < 3; ++i) {
        CHECK(S.values(i, i) == doctest::Approx(1.0).epsilon(1e-6));
    }
    CHECK((S.values - S.values.transpose()).cwiseAbs().maxCoeff() == 0.0);  // mirrored
    CHECK(S.row_layers == std::vector<int>{1, 2, 3});
}

TEST_CASE("self_similarity separates planted blocks") {
    PlantedSpec spec;
    spec.n_examples = 128;
    spec.feature_dim = 8;
    spec.layer_count = 8;
    spec.block_boundaries = {4, 8};
    spec.noise_sigma = 0.05;
    spec.seed = 3;
    const SimilarityMatrix S =
        self_similarity(planted_block_activations(spec), biased_linear());

    double within = 0.0, between = 0.0;
    int within_n = 0, between_n = 0;
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
            if (i == j) continue;
            const bool same_block = (i < 4) == (j < 4);
            (same_block ? within : between) += S.values(i, j);
            (same_block ? within_n : between_n) += 1;
        }
    }
    CHECK(within / within_n > between / between_n);
}

TEST_CASE("self_similarity annotates the degenerate layer") {
    ActivationSet set = testutil::make_set(
        {testutil::random_matrix(8, 3, 4), Eigen::MatrixXd::Constant(8, 3, 1.0)});
    try {
        self_similarity(set, biased_linear());
        FAIL("expected degenerate error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::degenerate);
        CHECK(std::string(e.what()).find("layer 2") != std::string::npos);
    }
}

TEST_CASE("cross_similarity of a set with itself equals self_similarity") {
    PlantedSpec spec;
    spec.layer_count = 4;
    spec.block_boundaries = {2, 4};
    spec.n_examples = 24;
    spec.feature_dim = 6;
    spec.seed = 5;
    const ActivationSet A = planted_block_activations(spec);
    for (HsicEstimator est : {HsicEstimator::biased, HsicEstimator::unbiased}) {
        CkaConfig cfg;
        cfg.estimator = est;
        const SimilarityMatrix self = self_similarity(A, cfg);
        const SimilarityMatrix cross = cross_similarity(A, A, cfg);
        CHECK((self.values - cross.values).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("cross_similarity shape follows the two layer counts") {
    std::vector<Eigen::MatrixXd> ten, five;
    for (int i = 0; i < 10; ++i) ten.push_back(testutil::random_matrix(12, 4, 100 + i));
    for (int i = 0; i < 5; ++i) five.push_back(testutil::random_matrix(12, 4, 200 + i));
    const SimilarityMatrix S = cross_similarity(testutil::make_set(ten, "deep"),
                                                testutil::make_set(five, "shallow"),
                                                biased_linear());
    CHECK(S.values.rows() == 10);
    CHECK(S.values.cols() == 5);
    CHECK(S.row_model.model_id == "deep");
    CHECK(S.col_model.model_id == "shallow");
}

TEST_CASE("cross_similarity against an orthogonally rotated copy matches self") {
    PlantedSpec spec;
    spec.layer_count = 5;
    spec.block_boundaries = {3, 5};
    spec.n_examples = 48;
    spec.feature_dim = 8;
    spec.seed = 6;
    const ActivationSet A = planted_block_activations(spec);
    const ActivationSet B = rotated_copy(A, 900);
    const SimilarityMatrix self = self_similarity(A, biased_linear());
    const SimilarityMatrix cross = cross_similarity(A, B, biased_linear());
    CHECK((self.values - cross.values).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("cross_similarity transpose identity") {
    const ActivationSet A = testutil::make_set(
        {testutil::random_matrix(10, 3, 7), testutil::random_matrix(10, 5, 8)});
    const ActivationSet B = testutil::make_set({testutil::random_matrix(10, 4, 9)});
    const SimilarityMatrix ab = cross_similarity(A, B, biased_linear());
    const SimilarityMatrix ba = cross_similarity(B, A, biased_linear());
    CHECK((ab.values - ba.values.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cross_similarity enforces example alignment") {
    const ActivationSet A = testutil::make_set({testutil::random_matrix(10, 3, 10)});
    const ActivationSet B = testutil::make_set({testutil::random_matrix(12, 3, 11)});
    try {
        cross_similarity(A, B, biased_linear());
        FAIL("expected alignment error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::alignment);
    }

    const ActivationSet C =
        testutil::make_set({testutil::random_matrix(10, 3, 12)}, "c", "hash-a");
    const ActivationSet D =
        testutil::make_set({testutil::random_matrix(10, 3, 13)}, "d", "hash-b");
    CHECK_THROWS_AS(cross_similarity(C, D, biased_linear()), Error);
}

TEST_CASE("one_to_all orders cells by depth and keeps reference rows") {
    DepthFamilySpec spec;
    spec.n_examples = 32;
    spec.feature_dim = 4;
    spec.seed = 14;
    spec.groups = {"early", "late"};
    spec.depths = {2, 3, 4, 5, 6, 7, 8, 9, 11, 12, 13, 14, 15, 10};
    for (int d : spec.depths) spec.shared_groups[d] = {"early", "late"};
    std::vector<ActivationSet> family = planted_depth_family(spec);

    ActivationSet reference;
    std::vector<ActivationSet> others;
    for (auto& set : family) {
        if (set.depth == 10) reference = set;
        else others.push_back(std::move(set));
    }
    REQUIRE(others.size() == 13);

    const ComparisonGrid grid = one_to_all(reference, others, biased_linear());
    REQUIRE(grid.cells.size() == 13);
    int previous = 0;
    for (const auto& cell : grid.cells) {
        CHECK(cell.values.rows() == 10);
        CHECK(cell.col_model.depth > previous);
        previous = cell.col_model.depth;
    }
}

TEST_CASE("one_to_all 2-to-all layout: shallow reference against every other depth") {
    DepthFamilySpec spec;
    spec.n_examples = 32;
    spec.feature_dim = 4;
    spec.seed = 19;
    spec.groups = {"g"};
    spec.depths = {2, 1, 3, 4, 5, 6, 7, 8, 9, 10};
    for (int d : spec.depths) spec.shared_groups[d] = {"g"};
    std::vector<ActivationSet> family = planted_depth_family(spec);

    ActivationSet reference;
    std::vector<ActivationSet> others;
    for (auto& set : family) {
        if (set.depth == 2) reference = set;
        else others.push_back(std::move(set));
    }
    REQUIRE(others.size() == 9);

    const ComparisonGrid grid = one_to_all(reference, others, biased_linear());
    REQUIRE(grid.cells.size() == 9);
    CHECK(grid.cells.front().col_model.depth == 1);
    CHECK(grid.cells.back().col_model.depth == 10);
    for (const auto& cell : grid.cells) {
        CHECK(cell.values.rows() == 2);  // every cell keeps the reference's layer rows
        CHECK(cell.values.cols() == cell.col_model.depth);
    }
}

TEST_CASE("one_to_all with the reference itself reduces to self-similarity") {
    const ActivationSet A = testutil::make_set(
        {testutil::random_matrix(12, 3, 15), testutil::random_matrix(12, 4, 16)});
    const std::vector<ActivationSet> others = {A};
    const ComparisonGrid grid = one_to_all(A, others, biased_linear());
    REQUIRE(grid.cells.size() == 1);
    const SimilarityMatrix self = self_similarity(A, biased_linear());
    CHECK((grid.cells[0].values - self.values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("one_to_all rejects an empty comparison list") {
    const ActivationSet A = testutil::make_set({testutil::random_matrix(12, 3, 17)});
    const std::vector<ActivationSet> none;
    try {
        one_to_all(A, none, biased_linear());
        FAIL("expected argument error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::argument);
    }
}

namespace {

SimilarityMatrix fold_matrix(double value, int fold) {
    SimilarityMatrix S;
    S.values = Eigen::MatrixXd::Constant(1, 1, value);
    S.row_model = {"m", ModelFamily::physnet3dcnn, 1, fold, TransformTag::none};
    S.col_model = S.row_model;
    S.row_layers = {1};
    S.col_layers = {1};
    return S;
}

}  // namespace

TEST_CASE("average_folds arithmetic and fold accounting") {
    std::vector<SimilarityMatrix> five(5, fold_matrix(0.7, 0));
    for (int i = 0; i < 5; ++i) five[static_cast<std::size_t>(i)].row_model.fold = i;
    const SimilarityMatrix mean = average_folds(five);
    CHECK(mean.values(0, 0) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(mean.folds_averaged == 5);
    CHECK_FALSE(mean.row_model.fold.has_value());

    const std::vector<SimilarityMatrix> two = {fold_matrix(0.0, 0), fold_matrix(1.0, 1)};
    CHECK(average_folds(two).values(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("average_folds is exactly permutation invariant") {
    std::vector<SimilarityMatrix> mats;
    for (int f = 0; f < 5; ++f) {
        SimilarityMatrix S = fold_matrix(0.0, f);
        S.values = testutil::random_matrix(4, 4, 400 + static_cast<std::uint64_t>(f));
        S.row_layers = S.col_layers = {1, 2, 3, 4};
        mats.push_back(std::move(S));
    }
    const SimilarityMatrix forward = average_folds(mats);
    std::reverse(mats.begin(), mats.end());
    const SimilarityMatrix backward = average_folds(mats);
    CHECK((forward.values - backward.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("average_folds rejects mismatched inputs") {
    SimilarityMatrix a = fold_matrix(0.5, 0);
    SimilarityMatrix wide = a;
    wide.values = Eigen::MatrixXd::Constant(1, 2, 0.5);
    std::vector<SimilarityMatrix> mixed = {a, wide};
    try {
        average_folds(mixed);
        FAIL("expected aggregation error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::aggregation);
    }

    SimilarityMatrix other_cfg = a;
    other_cfg.config.estimator = a.config.estimator == HsicEstimator::biased
                                     ? HsicEstimator::unbiased
                                     : HsicEstimator::biased;
    std::vector<SimilarityMatrix> cfg_mix = {a, other_cfg};
    CHECK_THROWS_AS(average_folds(cfg_mix), Error);

    SimilarityMatrix other_model = a;
    other_model.row_model.depth = 9;
    std::vector<SimilarityMatrix> model_mix = {a, other_model};
    CHECK_THROWS_AS(average_folds(model_mix), Error);
}

TEST_CASE("transform sensitivity: planted tags react to their own transform set") {
    // Desk-scale analogue of the augmentation comparison: spatial
    // transforms must hit spatial-tagged probes harder than temporal ones,
    // and conversely.
    int correct = 0;
    const int seeds = 3;
    for (int s = 0; s < seeds; ++s) {
        SensitivitySpec spec;
        spec.n_clips = 40;
        spec.frames = 48;
        spec.height = 12;
        spec.width = 12;
        spec.features_per_layer = 12;
        spec.layer_tags = {SensitivityTag::spatial, SensitivityTag::spatial,
                           SensitivityTag::temporal, SensitivityTag::temporal};
        spec.seed = 5000 + static_cast<std::uint64_t>(s);

        const std::vector<Clip> clean = sensitivity_clips(spec);
        const ActivationSet base = measure_activations(spec, clean, "clean", TransformTag::none);

        TransformSpec spatial;
        spatial.set = TransformTag::spatial;
        spatial.seed = spec.seed + 1;
        spatial.flip_prob = 0.5;
        spatial.illum_amplitude = 0.05;
        spatial.blur_sigma = 1.5;
        const ActivationSet spatial_run = measure_activations(
            spec, apply_set_all(clean, spatial), "spatial", TransformTag::spatial);

        TransformSpec temporal;
        temporal.set = TransformTag::temporal;
        temporal.seed = spec.seed + 2;
        temporal.speed_base = 1.25;
        temporal.speed_mod_amplitude = 0.2;
        temporal.speed_mod_freq = 0.4;
        const ActivationSet temporal_run = measure_activations(
            spec, apply_set_all(clean, temporal), "temporal", TransformTag::temporal);

        const auto mean_diag = [&](const ActivationSet& other, bool spatial_layers) {
            const SimilarityMatrix S = cross_similarity(base, other, biased_linear());
            double sum = 0.0;
            for (int l = 0; l < 2; ++l) {
                const int idx = spatial_layers ? l : 2 + l;
                sum += S.values(idx, idx);
            }
            return sum / 2.0;
        };

        const bool spatial_hits_spatial =
            mean_diag(spatial_run, true) < mean_diag(spatial_run, false);
        const bool temporal_hits_temporal =
            mean_diag(temporal_run, false) < mean_diag(temporal_run, true);
        if (spatial_hits_spatial && temporal_hits_temporal) ++correct;
    }
    CHECK(correct == seeds);
}

TEST_CASE("similarity csv + sidecar round trip") {
    testutil::TempDir dir;
    SimilarityMatrix S;
    S.values = testutil::random_matrix(3, 2, 30);
    S.row_model = {"row-model", ModelFamily::physnet3dcnn, 3, 2, TransformTag::spatial};
    S.col_model = {"col-model", ModelFamily::tscan, 2, std::nullopt, TransformTag::none};
    S.config.kernel = KernelKind::rbf;
    S.config.estimator = HsicEstimator::biased;
    S.config.sigma_frac = 0.5;
    S.folds_averaged = 5;
    S.row_layers = {1, 2, 3};
    S.col_layers = {1, 2};

    write_similarity_csv(S, dir / "s.csv");
    write_similarity_sidecar(S, dir / "s.json");

    const SimilarityMatrix back = read_similarity_csv(dir / "s.csv");
    CHECK(back.values.rows() == 3);
    CHECK(back.values.cols() == 2);
    CHECK((back.values - S.values).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(back.row_model.model_id == "row-model");
    CHECK(back.col_model.model_id == "col-model");
    CHECK(back.col_model.family == ModelFamily::tscan);
    CHECK(back.row_model.fold == std::optional<int>(2));
    CHECK_FALSE(back.col_model.fold.has_value());
    CHECK(back.config.kernel == KernelKind::rbf);
    CHECK(back.config.estimator == HsicEstimator::biased);
    CHECK(back.folds_averaged == 5);

    std::ifstream sidecar(dir / "s.json");
    const std::string text((std::istreambuf_iterator<char>(sidecar)),
                           std::istreambuf_iterator<char>());
    CHECK(text.find("\"folds_averaged\": 5") != std::string::npos);
    CHECK(text.find("\"row_model\"") != std::string::npos);
}
