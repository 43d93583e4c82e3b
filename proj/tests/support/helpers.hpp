#pragma once

#include "repsim/activation_set.hpp"
#include "repsim/rng.hpp"

#include <Eigen/Dense>

#include <cstdlib>
#include <filesystem>
#include <string>

namespace testutil {

inline Eigen::MatrixXd random_matrix(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
    repsim::Rng rng(seed);
    Eigen::MatrixXd m(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) m(i, j) = rng.gaussian();
    }
    return m;
}

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        auto pattern =
            (std::filesystem::temp_directory_path() / "repsim-test-XXXXXX").string();
        if (!mkdtemp(pattern.data())) {
            throw std::runtime_error("mkdtemp failed");
        }
        path_ = pattern;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline repsim::ActivationSet make_set(const std::vector<Eigen::MatrixXd>& layers,
                                      const std::string& model_id = "test-model",
                                      const std::string& examples_hash = "") {
    repsim::ActivationSet set;
    set.model_id = model_id;
    set.family = repsim::ModelFamily::physnet3dcnn;
    set.depth = static_cast<int>(layers.size());
    set.fold = 0;
    set.transform = repsim::TransformTag::none;
    set.examples_hash = examples_hash;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        repsim::LayerActivations la;
        la.index = static_cast<int>(i) + 1;
        la.name = "layer" + std::to_string(i + 1);
        la.data = layers[i];
        la.source_shape = {static_cast<std::size_t>(layers[i].rows()),
                           static_cast<std::size_t>(layers[i].cols())};
        set.layers.push_back(std::move(la));
    }
    return set;
}

}  // namespace testutil
