#include "repsim/sim_matrix.hpp"

#include "repsim/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace repsim {

using nlohmann::json;

ModelMeta ModelMeta::of(const ActivationSet& set) {
    ModelMeta meta;
    meta.model_id = set.model_id;
    meta.family = set.family;
    meta.depth = set.depth;
    meta.fold = set.fold;
    meta.transform = set.transform;
    return meta;
}

bool ModelMeta::same_modulo_fold(const ModelMeta& other) const {
    return family == other.family && depth == other.depth && transform == other.transform;
}

namespace {

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string describe(const ModelMeta& m) {
    std::ostringstream out;
    out << "model_id=" << m.model_id << " family=" << to_string(m.family)
        << " depth=" << m.depth << " fold=" << (m.fold ? std::to_string(*m.fold) : "avg")
        << " transform=" << to_string(m.transform);
    return out.str();
}

void check_alignment(const ActivationSet& A, const ActivationSet& B) {
    if (A.example_count() != B.example_count()) {
        raise(ErrorKind::alignment,
              "example counts differ: " + A.model_id + " has " +
                  std::to_string(A.example_count()) + ", " + B.model_id + " has " +
                  std::to_string(B.example_count()));
    }
    if (!A.examples_hash.empty() && !B.examples_hash.empty() &&
        A.examples_hash != B.examples_hash) {
        raise(ErrorKind::alignment, "examples hash mismatch between " + A.model_id + " and " +
                                        B.model_id + " (different evaluation inputs)");
    }
}

// Per-layer gram/self-HSIC cache so an L_A x L_B grid builds each gram
// once instead of once per pair.
struct LayerKernels {
    std::vector<GramMatrix> grams;
    std::vector<double> self_hsic;
};

double pair_hsic(const GramMatrix& K, const GramMatrix& L, HsicEstimator estimator) {
    return estimator == HsicEstimator::biased ? hsic_biased(K, L) : hsic_unbiased(K, L);
}

LayerKernels prepare_kernels(const ActivationSet& A, const CkaConfig& cfg) {
    LayerKernels out;
    out.grams.reserve(A.layers.size());
    for (const auto& layer : A.layers) {
        bool identical = true;
        for (Eigen::Index i = 1; i < layer.data.rows() && identical; ++i) {
            identical = !(layer.data.row(i).array() != layer.data.row(0).array()).any();
        }
        if (identical) {
            raise(ErrorKind::degenerate, A.model_id + " layer " + std::to_string(layer.index) +
                                             ": constant representation");
        }
        GramMatrix K = cfg.kernel == KernelKind::linear ? gram_linear(layer.data)
                                                        : gram_rbf(layer.data, cfg.sigma_frac);
        if (cfg.estimator == HsicEstimator::biased) K = center_gram(K);
        out.grams.push_back(std::move(K));
    }
    for (const auto& K : out.grams) {
        const double h = pair_hsic(K, K, cfg.estimator);
        if (!(h > 0.0)) {
            raise(ErrorKind::degenerate, A.model_id + ": zero self-HSIC in layer gram");
        }
        out.self_hsic.push_back(h);
    }
    return out;
}

double normalized_entry(const GramMatrix& K, const GramMatrix& L, double hxx, double hyy,
                        HsicEstimator estimator) {
    const double value = pair_hsic(K, L, estimator) / std::sqrt(hxx * hyy);
    if (!std::isfinite(value)) {
        raise(ErrorKind::degenerate, "similarity entry is non-finite");
    }
    return value;
}

std::vector<int> layer_indices(const ActivationSet& A) {
    std::vector<int> idx;
    idx.reserve(A.layers.size());
    for (const auto& layer : A.layers) idx.push_back(layer.index);
    return idx;
}

// Minibatch mode cannot reuse full-batch grams; evaluate pairs directly.
double minibatch_entry(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                       const CkaConfig& cfg) {
    return cka(X, Y, cfg);
}

}  // namespace

SimilarityMatrix self_similarity(const ActivationSet& A, const CkaConfig& cfg) {
    cfg.check();
    A.check_invariants();
    const auto L = static_cast<Eigen::Index>(A.layers.size());

    SimilarityMatrix S;
    S.row_model = ModelMeta::of(A);
    S.col_model = S.row_model;
    S.config = cfg;
    S.row_layers = layer_indices(A);
    S.col_layers = S.row_layers;
    S.values.resize(L, L);

    if (cfg.minibatch_size) {
        for (Eigen::Index i = 0; i < L; ++i) {
            for (Eigen::Index j = i; j < L; ++j) {
                try {
                    S.values(i, j) = minibatch_entry(A.layers[i].data, A.layers[j].data, cfg);
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::degenerate) throw;
                    raise(ErrorKind::degenerate,
                          A.model_id + " layers (" + std::to_string(A.layers[i].index) + "," +
                              std::to_string(A.layers[j].index) + "): " + e.what());
                }
                S.values(j, i) = S.values(i, j);
            }
        }
        return S;
    }

    const LayerKernels kernels = prepare_kernels(A, cfg);
    for (Eigen::Index i = 0; i < L; ++i) {
        for (Eigen::Index j = i; j < L; ++j) {
            S.values(i, j) = normalized_entry(kernels.grams[i], kernels.grams[j],
                                              kernels.self_hsic[i], kernels.self_hsic[j],
                                              cfg.estimator);
            S.values(j, i) = S.values(i, j);
        }
    }
    return S;
}

SimilarityMatrix cross_similarity(const ActivationSet& A, const ActivationSet& B,
                                  const CkaConfig& cfg) {
    cfg.check();
    A.check_invariants();
    B.check_invariants();
    check_alignment(A, B);

    SimilarityMatrix S;
    S.row_model = ModelMeta::of(A);
    S.col_model = ModelMeta::of(B);
    S.config = cfg;
    S.row_layers = layer_indices(A);
    S.col_layers = layer_indices(B);
    const auto LA = static_cast<Eigen::Index>(A.layers.size());
    const auto LB = static_cast<Eigen::Index>(B.layers.size());
    S.values.resize(LA, LB);

    if (cfg.minibatch_size) {
        for (Eigen::Index i = 0; i < LA; ++i) {
            for (Eigen::Index j = 0; j < LB; ++j) {
                S.values(i, j) = minibatch_entry(A.layers[i].data, B.layers[j].data, cfg);
            }
        }
        return S;
    }

    const LayerKernels ka = prepare_kernels(A, cfg);
    const LayerKernels kb = prepare_kernels(B, cfg);
    for (Eigen::Index i = 0; i < LA; ++i) {
        for (Eigen::Index j = 0; j < LB; ++j) {
            S.values(i, j) = normalized_entry(ka.grams[i], kb.grams[j], ka.self_hsic[i],
                                              kb.self_hsic[j], cfg.estimator);
        }
    }
    return S;
}

ComparisonGrid one_to_all(const ActivationSet& reference,
                          std::span<const ActivationSet> others, const CkaConfig& cfg) {
    if (others.empty()) raise(ErrorKind::argument, "one_to_all: no comparison sets");

    std::vector<const ActivationSet*> ordered;
    ordered.reserve(others.size());
    for (const auto& set : others) ordered.push_back(&set);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const ActivationSet* a, const ActivationSet* b) {
                         if (a->depth != b->depth) return a->depth < b->depth;
                         return a->model_id < b->model_id;
                     });

    ComparisonGrid grid;
    grid.reference = ModelMeta::of(reference);
    grid.cells.reserve(ordered.size());
    for (const ActivationSet* other : ordered) {
        grid.cells.push_back(cross_similarity(reference, *other, cfg));
    }
    return grid;
}

SimilarityMatrix average_folds(std::span<const SimilarityMatrix> mats) {
    if (mats.empty()) raise(ErrorKind::aggregation, "average_folds: no matrices");
    const SimilarityMatrix& first = mats.front();
    for (const auto& m : mats) {
        if (m.values.rows() != first.values.rows() || m.values.cols() != first.values.cols()) {
            raise(ErrorKind::aggregation, "average_folds: matrix shapes differ");
        }
        if (!m.row_model.same_modulo_fold(first.row_model) ||
            !m.col_model.same_modulo_fold(first.col_model)) {
            raise(ErrorKind::aggregation, "average_folds: models differ beyond fold");
        }
        if (m.config.kernel != first.config.kernel ||
            m.config.estimator != first.config.estimator ||
            m.config.sigma_frac != first.config.sigma_frac) {
            raise(ErrorKind::aggregation, "average_folds: configurations differ");
        }
    }

    SimilarityMatrix out = first;
    out.folds_averaged = 0;
    for (const auto& m : mats) out.folds_averaged += m.folds_averaged;

    // Accumulate each entry in sorted order so the mean is exactly
    // invariant to the order the folds are supplied in.
    std::vector<double> cell(mats.size());
    for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < out.values.cols(); ++j) {
            for (std::size_t f = 0; f < mats.size(); ++f) cell[f] = mats[f].values(i, j);
            std::sort(cell.begin(), cell.end());
            double sum = 0.0;
            for (double v : cell) sum += v;
            out.values(i, j) = sum / static_cast<double>(mats.size());
        }
    }
    out.row_model.fold.reset();
    out.col_model.fold.reset();
    return out;
}

void write_similarity_csv(const SimilarityMatrix& S, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::io, "cannot write " + path.string());
    out << "# rows: " << describe(S.row_model) << " ; cols: " << describe(S.col_model) << "\n";
    out << "# config: kernel=" << to_string(S.config.kernel)
        << " estimator=" << to_string(S.config.estimator)
        << " sigma_frac=" << format_value(S.config.sigma_frac)
        << " folds_averaged=" << S.folds_averaged << "\n";
    for (Eigen::Index i = 0; i < S.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < S.values.cols(); ++j) {
            if (j > 0) out << ",";
            out << format_value(S.values(i, j));
        }
        out << "\n";
    }
    if (!out) raise(ErrorKind::io, "write failed for " + path.string());
}

namespace {

json meta_to_json(const ModelMeta& m) {
    json j = {{"model_id", m.model_id},
              {"family", to_string(m.family)},
              {"depth", m.depth},
              {"transform", to_string(m.transform)}};
    if (m.fold) {
        j["fold"] = *m.fold;
    } else {
        j["fold"] = "averaged";
    }
    return j;
}

ModelMeta meta_from_tokens(const std::string& text) {
    ModelMeta meta;
    std::istringstream in(text);
    std::string token;
    while (in >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (key == "model_id") meta.model_id = value;
        else if (key == "family") meta.family = family_from_string(value);
        else if (key == "depth") meta.depth = std::stoi(value);
        else if (key == "fold") meta.fold = value == "avg" ? std::nullopt
                                                           : std::optional<int>(std::stoi(value));
        else if (key == "transform") meta.transform = transform_from_string(value);
    }
    return meta;
}

}  // namespace

void write_similarity_sidecar(const SimilarityMatrix& S, const std::filesystem::path& path) {
    json doc = {{"row_model", meta_to_json(S.row_model)},
                {"col_model", meta_to_json(S.col_model)},
                {"config",
                 {{"kernel", to_string(S.config.kernel)},
                  {"estimator", to_string(S.config.estimator)},
                  {"sigma_frac", S.config.sigma_frac}}},
                {"folds_averaged", S.folds_averaged},
                {"rows", S.values.rows()},
                {"cols", S.values.cols()},
                {"row_layers", S.row_layers},
                {"col_layers", S.col_layers}};
    if (S.config.minibatch_size) doc["config"]["minibatch_size"] = *S.config.minibatch_size;

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::io, "cannot write " + path.string());
    out << doc.dump(2) << "\n";
    if (!out) raise(ErrorKind::io, "write failed for " + path.string());
}

SimilarityMatrix read_similarity_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::io, "cannot open " + path.string());

    SimilarityMatrix S;
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto rows_pos = line.find("rows: ");
            const auto cols_pos = line.find("; cols: ");
            if (rows_pos != std::string::npos && cols_pos != std::string::npos) {
                S.row_model = meta_from_tokens(line.substr(rows_pos + 6, cols_pos - rows_pos - 6));
                S.col_model = meta_from_tokens(line.substr(cols_pos + 8));
            }
            const auto cfg_pos = line.find("config: ");
            if (cfg_pos != std::string::npos) {
                std::istringstream cfg_in(line.substr(cfg_pos + 8));
                std::string token;
                while (cfg_in >> token) {
                    const auto eq = token.find('=');
                    if (eq == std::string::npos) continue;
                    const std::string key = token.substr(0, eq);
                    const std::string value = token.substr(eq + 1);
                    if (key == "kernel") S.config.kernel = kernel_from_string(value);
                    else if (key == "estimator") S.config.estimator = estimator_from_string(value);
                    else if (key == "sigma_frac") S.config.sigma_frac = std::stod(value);
                    else if (key == "folds_averaged") S.folds_averaged = std::stoi(value);
                }
            }
            continue;
        }
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                raise(ErrorKind::format, path.string() + ": bad numeric cell '" + cell + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) raise(ErrorKind::format, path.string() + ": no numeric rows");
    const std::size_t cols = rows.front().size();
    for (const auto& row : rows) {
        if (row.size() != cols) {
            raise(ErrorKind::format, path.string() + ": ragged rows");
        }
    }
    S.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            S.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    for (int i = 1; i <= S.values.rows(); ++i) S.row_layers.push_back(i);
    for (int j = 1; j <= S.values.cols(); ++j) S.col_layers.push_back(j);
    return S;
}

}  // namespace repsim
