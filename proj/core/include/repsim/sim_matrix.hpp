#pragma once

#include "repsim/activation_set.hpp"
#include "repsim/cka.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace repsim {

struct ModelMeta {
    std::string model_id;
    ModelFamily family = ModelFamily::physnet3dcnn;
    int depth = 0;
    std::optional<int> fold;  // nullopt once folds are averaged
    TransformTag transform = TransformTag::none;

    static ModelMeta of(const ActivationSet& set);
    bool same_modulo_fold(const ModelMeta& other) const;
};

/// L_A x L_B grid of CKA values between two layer sequences.
struct SimilarityMatrix {
    Eigen::MatrixXd values;
    ModelMeta row_model;
    ModelMeta col_model;
    CkaConfig config;
    int folds_averaged = 1;
    std::vector<int> row_layers;  // layer indices labeling the rows
    std::vector<int> col_layers;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
};

/// One reference model compared against several others, ordered by the
/// other model's depth ascending.
struct ComparisonGrid {
    ModelMeta reference;
    std::vector<SimilarityMatrix> cells;  // reference layers x other layers
};

/// values[i][j] = cka(layer_i, layer_j). Upper triangle computed, lower
/// mirrored, so the result is exactly symmetric.
SimilarityMatrix self_similarity(const ActivationSet& A, const CkaConfig& cfg = {});

/// values[i][j] = cka(A.layer_i, B.layer_j). A and B must hold activations
/// for the same examples in the same order: equal example counts, and equal
/// examples_hash when both record one.
SimilarityMatrix cross_similarity(const ActivationSet& A, const ActivationSet& B,
                                  const CkaConfig& cfg = {});

/// One cross_similarity cell per entry of `others`, depth ascending.
ComparisonGrid one_to_all(const ActivationSet& reference,
                          std::span<const ActivationSet> others,
                          const CkaConfig& cfg = {});

/// Entry-wise mean across folds of the same comparison.
SimilarityMatrix average_folds(std::span<const SimilarityMatrix> mats);

/// CSV with a two-line metadata header (row model / column model, config)
/// followed by the numeric grid, 9 significant digits.
void write_similarity_csv(const SimilarityMatrix& S, const std::filesystem::path& path);

/// Sidecar JSON with the full metadata (no values).
void write_similarity_sidecar(const SimilarityMatrix& S, const std::filesystem::path& path);

/// Parse a file produced by write_similarity_csv. Metadata in the header
/// is restored; fields it does not carry keep their defaults.
SimilarityMatrix read_similarity_csv(const std::filesystem::path& path);

}  // namespace repsim
