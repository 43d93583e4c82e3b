#pragma once

#include "repsim/tensor.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace repsim {

enum class ModelFamily { physnet3dcnn, tscan };
enum class TransformTag { none, spatial, temporal, all };

const char* to_string(ModelFamily family) noexcept;
const char* to_string(TransformTag tag) noexcept;
ModelFamily family_from_string(const std::string& s);
TransformTag transform_from_string(const std::string& s);

struct LayerActivations {
    int index = 0;  // 1-based, strictly increasing across the set
    std::string name;
    Eigen::MatrixXd data;  // examples x flattened features
    std::vector<std::size_t> source_shape;
};

/// One trained model's per-layer activations plus identifying metadata.
/// Immutable once loaded; safe to share across workers.
struct ActivationSet {
    std::string model_id;
    ModelFamily family = ModelFamily::physnet3dcnn;
    int depth = 0;
    int fold = 0;
    TransformTag transform = TransformTag::none;
    std::string examples_hash;  // optional alignment token, empty if absent
    // Optional "transform_spec" manifest extension: the serialized
    // parameters of the transform run that produced these activations.
    std::string transform_block;
    std::vector<LayerActivations> layers;

    std::size_t layer_count() const { return layers.size(); }
    std::size_t example_count() const {
        return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().data.rows());
    }

    /// Throws on any structural invariant violation (ordering, shared
    /// example count, minimum sample count, non-finite data).
    void check_invariants() const;
};

/// Load a JSON manifest and every referenced NPY array. Layers come back
/// ordered by index and flattened per `mode`.
ActivationSet load_activation_set(const std::filesystem::path& manifest_path,
                                  FlattenMode mode = FlattenMode::flatten_all);

/// Write the set as manifest.json plus one NPY file per layer under `dir`.
/// Returns the manifest path.
std::filesystem::path save_activation_set(const ActivationSet& set,
                                          const std::filesystem::path& dir);

}  // namespace repsim
