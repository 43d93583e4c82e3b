#pragma once

#include "repsim/activation_set.hpp"
#include "repsim/transforms.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace repsim {

enum class SensitivityTag { none, spatial, temporal };

/// Recipe for an activation set with planted, known structure.
struct PlantedSpec {
    int n_examples = 64;
    int feature_dim = 16;
    int layer_count = 8;
    std::vector<int> block_boundaries;  // last layer of each block; final entry == layer_count
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    std::vector<SensitivityTag> sensitivity_tags;  // optional, per layer

    void check() const;
};

/// Every layer of block b is Z_b R + sigma E with a shared per-block base
/// Z_b, a fresh random rotation R and fresh Gaussian noise E, so
/// within-block linear CKA is ~1 and between-block CKA is low.
ActivationSet planted_block_activations(const PlantedSpec& spec);

/// Each layer right-multiplied by a fresh random orthogonal matrix
/// (QR of a Gaussian, sign-corrected to determinant +1).
ActivationSet rotated_copy(const ActivationSet& A, std::uint64_t seed);

/// Haar-ish random orthogonal p x p matrix with determinant +1.
Eigen::MatrixXd random_orthogonal(int p, std::uint64_t seed);

/// Family of models of different depths sharing named representation
/// groups. Layer positions map proportionally onto the global group list;
/// a depth lacking a group fills those positions with fresh independent
/// bases, guaranteeing low cross-CKA there.
struct DepthFamilySpec {
    int n_examples = 256;
    int feature_dim = 16;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::string> groups;  // global ordered group names
    std::vector<int> depths;
    std::map<int, std::set<std::string>> shared_groups;  // depth -> groups it expresses

    void check() const;
};

std::vector<ActivationSet> planted_depth_family(const DepthFamilySpec& spec);

/// Synthetic clip corpus with separable spatial texture and temporal
/// oscillation, plus probe-based activation measurement: spatial-tagged
/// layers sample per-location time means, temporal-tagged layers sample
/// the frame-mean time series, untagged layers sample raw voxels.
struct SensitivitySpec {
    int n_clips = 48;
    int frames = 60;
    int height = 16;
    int width = 16;
    double frame_rate = 30.0;
    int features_per_layer = 16;
    std::vector<SensitivityTag> layer_tags;
    std::uint64_t seed = 0;

    void check() const;
};

std::vector<Clip> sensitivity_clips(const SensitivitySpec& spec);

/// Apply one transform set to every clip, deriving a distinct child seed
/// per clip so random choices (flip, offset) vary across clips.
std::vector<Clip> apply_set_all(const std::vector<Clip>& clips, const TransformSpec& spec);

/// Measure probe activations over the clips. Probe placement depends only
/// on the generator parameters, so clean and transformed runs are directly
/// comparable.
ActivationSet measure_activations(const SensitivitySpec& spec,
                                  const std::vector<Clip>& clips,
                                  const std::string& model_id,
                                  TransformTag transform);

}  // namespace repsim
