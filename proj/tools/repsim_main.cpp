// repsim: CKA-based representation similarity analysis for layer
// activation dumps. Subcommands cover the full workflow: load activations,
// build self/cross similarity maps, detect layer blocks, measure coverage,
// recommend a refined depth, and emit architecture descriptors plus
// synthetic fixtures.

#include "repsim/activation_set.hpp"
#include "repsim/arch.hpp"
#include "repsim/cka.hpp"
#include "repsim/error.hpp"
#include "repsim/heatmap.hpp"
#include "repsim/rng.hpp"
#include "repsim/sim_matrix.hpp"
#include "repsim/structure.hpp"
#include "repsim/synth.hpp"
#include "repsim/transforms.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace repsim;

namespace {

// ---------------------------------------------------------------------
// logging (REPSIM_LOG=quiet|info|debug, stderr only)

int log_level() {
    static const int level = [] {
        const char* env = std::getenv("REPSIM_LOG");
        if (!env) return 1;
        const std::string value(env);
        if (value == "quiet") return 0;
        if (value == "debug") return 2;
        return 1;
    }();
    return level;
}

void log_info(const std::string& message) {
    if (log_level() >= 1) std::cerr << "repsim: " << message << "\n";
}

void log_debug(const std::string& message) {
    if (log_level() >= 2) std::cerr << "repsim[debug]: " << message << "\n";
}

// ---------------------------------------------------------------------
// shared flags

struct CommonFlags {
    std::string kernel = "linear";
    std::string estimator = "unbiased";
    double sigma_frac = 1.0;
    int minibatch = 0;  // 0 disables
    std::string flatten = "all";
    bool average_folds = false;
    double tau = 0.8;
    double min_coverage = 1.0;
    int max_blocks = 4;
    double penalty = 0.05;
    std::string out;
    std::string palette = "gray";
    double clamp_lo = 0.0;
    double clamp_hi = 1.0;
};

void add_cka_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--kernel", flags.kernel, "Kernel: linear or rbf")
        ->check(CLI::IsMember({"linear", "rbf"}));
    cmd->add_option("--estimator", flags.estimator, "HSIC estimator: biased or unbiased")
        ->check(CLI::IsMember({"biased", "unbiased"}));
    cmd->add_option("--sigma-frac", flags.sigma_frac,
                    "RBF bandwidth as a fraction of the median pairwise distance");
    cmd->add_option("--minibatch", flags.minibatch,
                    "Accumulate CKA over example batches of this size (unbiased only)");
    cmd->add_option("--flatten", flags.flatten, "Activation flattening: all or spatial-mean")
        ->check(CLI::IsMember({"all", "spatial-mean"}));
}

void add_render_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--palette", flags.palette, "Heatmap palette: gray or viridis")
        ->check(CLI::IsMember({"gray", "viridis"}));
    cmd->add_option("--clamp-lo", flags.clamp_lo, "Lower clamp for value-to-intensity mapping");
    cmd->add_option("--clamp-hi", flags.clamp_hi, "Upper clamp for value-to-intensity mapping");
}

CkaConfig cka_config(const CommonFlags& flags) {
    CkaConfig cfg;
    cfg.kernel = kernel_from_string(flags.kernel);
    cfg.estimator = estimator_from_string(flags.estimator);
    cfg.sigma_frac = flags.sigma_frac;
    if (flags.minibatch > 0) cfg.minibatch_size = flags.minibatch;
    cfg.check();
    return cfg;
}

FlattenMode flatten_mode(const CommonFlags& flags) {
    return flags.flatten == "spatial-mean" ? FlattenMode::spatial_mean
                                           : FlattenMode::flatten_all;
}

// ---------------------------------------------------------------------
// output helpers

std::string sanitize(const std::string& name) {
    std::string out;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
        out.push_back(ok ? c : '_');
    }
    return out.empty() ? "unnamed" : out;
}

fs::path ensure_out_dir(const std::string& out) {
    if (out.empty()) raise(ErrorKind::usage, "--out is required");
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) raise(ErrorKind::io, "cannot create output directory " + dir.string());
    return dir;
}

void write_json_file(const json& doc, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::io, "cannot write " + path.string());
    out << doc.dump(2) << "\n";
    if (!out) raise(ErrorKind::io, "write failed for " + path.string());
}

void write_text_file(const std::string& text, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::io, "cannot write " + path.string());
    out << text;
    if (!out) raise(ErrorKind::io, "write failed for " + path.string());
}

// Reports print numbers at 9 significant digits, like the CSV grids.
double sig9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::strtod(buf, nullptr);
}

std::vector<double> sig9(const std::vector<double>& values) {
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) out.push_back(sig9(v));
    return out;
}

// CSV + metadata sidecar + PGM heatmap for one similarity matrix.
void emit_matrix(const SimilarityMatrix& S, const fs::path& dir, const std::string& stem,
                 const CommonFlags& flags) {
    write_similarity_csv(S, dir / (stem + ".csv"));
    write_similarity_sidecar(S, dir / (stem + ".meta.json"));
    render_heatmap(S.values, dir / (stem + ".pgm"), palette_from_string(flags.palette),
                   flags.clamp_lo, flags.clamp_hi, HeatmapFormat::pgm);
    log_info("wrote " + (dir / stem).string() + ".{csv,meta.json,pgm}");
}

json coverage_to_json(const CoverageReport& report) {
    return {{"tau", sig9(report.tau)},
            {"coverage_fraction", sig9(report.coverage_fraction)},
            {"covered", report.covered},
            {"uncovered_layers", report.uncovered_layers}};
}

// ---------------------------------------------------------------------
// manifest loading

ActivationSet load_manifest(const fs::path& path, const CommonFlags& flags) {
    log_debug("loading " + path.string());
    return load_activation_set(path, flatten_mode(flags));
}

std::vector<fs::path> manifests_in(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        raise(ErrorKind::usage, dir.string() + " is not a directory");
    }
    std::vector<fs::path> found;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json" &&
            entry.path().filename() != "recommendation.json" &&
            entry.path().stem().string().find(".meta") == std::string::npos) {
            found.push_back(entry.path());
        }
    }
    std::sort(found.begin(), found.end());
    if (found.empty()) {
        raise(ErrorKind::usage, "no manifests (*.json) found under " + dir.string());
    }
    return found;
}

// Group per-fold sets by (family, depth, transform); each group becomes
// one averaged comparison cell.
std::map<std::string, std::vector<ActivationSet>> group_by_model(
    std::vector<ActivationSet>&& sets) {
    std::map<std::string, std::vector<ActivationSet>> groups;
    for (auto& set : sets) {
        char key[64];
        std::snprintf(key, sizeof(key), "%s-d%04d-t%d", to_string(set.family), set.depth,
                      static_cast<int>(set.transform));
        groups[key].push_back(std::move(set));
    }
    return groups;
}

// ---------------------------------------------------------------------
// subcommands

int cmd_self(const std::vector<std::string>& manifest_args, const CommonFlags& flags) {
    const fs::path dir = ensure_out_dir(flags.out);
    const CkaConfig cfg = cka_config(flags);

    if (manifest_args.size() > 1 && !flags.average_folds) {
        raise(ErrorKind::usage, "multiple manifests require --average-folds");
    }

    std::vector<SimilarityMatrix> per_fold;
    for (const auto& arg : manifest_args) {
        per_fold.push_back(self_similarity(load_manifest(arg, flags), cfg));
    }
    SimilarityMatrix result =
        per_fold.size() == 1 ? std::move(per_fold.front()) : average_folds(per_fold);

    const std::string stem = "self_" + sanitize(result.row_model.model_id) +
                             (result.folds_averaged > 1 ? "_avg" : "");
    emit_matrix(result, dir, stem, flags);
    return 0;
}

int cmd_cross(const std::vector<std::string>& manifest_args, const CommonFlags& flags) {
    const fs::path dir = ensure_out_dir(flags.out);
    const CkaConfig cfg = cka_config(flags);

    if (flags.average_folds) {
        if (manifest_args.size() < 2 || manifest_args.size() % 2 != 0) {
            raise(ErrorKind::usage,
                  "--average-folds expects reference/other manifest pairs");
        }
    } else if (manifest_args.size() != 2) {
        raise(ErrorKind::usage, "cross expects exactly two manifests");
    }

    std::vector<SimilarityMatrix> per_fold;
    for (std::size_t i = 0; i + 1 < manifest_args.size(); i += 2) {
        per_fold.push_back(cross_similarity(load_manifest(manifest_args[i], flags),
                                            load_manifest(manifest_args[i + 1], flags), cfg));
    }
    SimilarityMatrix result =
        per_fold.size() == 1 ? std::move(per_fold.front()) : average_folds(per_fold);

    const std::string stem = "cross_" + sanitize(result.row_model.model_id) + "__" +
                             sanitize(result.col_model.model_id) +
                             (result.folds_averaged > 1 ? "_avg" : "");
    emit_matrix(result, dir, stem, flags);
    return 0;
}

// Shared machinery for grid/recommend: reference vs every manifest in a
// directory, optionally fold-averaged, cells ordered by depth.
ComparisonGrid build_grid(const std::string& reference_arg, const std::string& others_arg,
                          const CommonFlags& flags, const CkaConfig& cfg) {
    const ActivationSet reference = load_manifest(reference_arg, flags);

    std::vector<ActivationSet> others;
    for (const auto& path : manifests_in(others_arg)) {
        others.push_back(load_manifest(path, flags));
    }

    ComparisonGrid grid;
    grid.reference = ModelMeta::of(reference);
    if (flags.average_folds) {
        for (auto& [key, members] : group_by_model(std::move(others))) {
            std::vector<SimilarityMatrix> cells;
            for (const auto& member : members) {
                cells.push_back(cross_similarity(reference, member, cfg));
            }
            grid.cells.push_back(cells.size() == 1 ? std::move(cells.front())
                                                   : average_folds(cells));
        }
    } else {
        for (const auto& other : others) {
            grid.cells.push_back(cross_similarity(reference, other, cfg));
        }
    }
    std::stable_sort(grid.cells.begin(), grid.cells.end(),
                     [](const SimilarityMatrix& a, const SimilarityMatrix& b) {
                         if (a.col_model.depth != b.col_model.depth) {
                             return a.col_model.depth < b.col_model.depth;
                         }
                         return a.col_model.model_id < b.col_model.model_id;
                     });
    return grid;
}

json recommendation_to_json(const DepthRecommendation& rec, const ModelMeta& reference) {
    json per_depth = json::array();
    for (const auto& dc : rec.per_depth) {
        per_depth.push_back({{"depth", dc.depth},
                             {"reference_covered", sig9(dc.reference_covered)},
                             {"candidate_covered", sig9(dc.candidate_covered)},
                             {"qualifies", dc.qualifies}});
    }
    json doc = {{"tau", sig9(rec.tau)},
                {"min_coverage", sig9(rec.min_coverage)},
                {"reference", {{"model_id", reference.model_id},
                               {"family", to_string(reference.family)},
                               {"depth", reference.depth}}},
                {"per_depth", per_depth}};
    if (rec.depth) {
        doc["recommended_depth"] = *rec.depth;
    } else {
        doc["recommended_depth"] = nullptr;
        doc["note"] = "no candidate reaches the requested coverage";
    }
    return doc;
}

int cmd_grid(const std::string& reference_arg, const std::string& others_arg,
             const CommonFlags& flags) {
    const fs::path dir = ensure_out_dir(flags.out);
    const CkaConfig cfg = cka_config(flags);
    const ComparisonGrid grid = build_grid(reference_arg, others_arg, flags, cfg);

    json coverage_cells = json::array();
    for (const auto& cell : grid.cells) {
        char stem[128];
        std::snprintf(stem, sizeof(stem), "grid_d%02d_%s", cell.col_model.depth,
                      sanitize(cell.col_model.model_id).c_str());
        emit_matrix(cell, dir, stem, flags);

        const CoverageReport report = coverage(cell.values, flags.tau);
        json entry = coverage_to_json(report);
        entry["model_id"] = cell.col_model.model_id;
        entry["depth"] = cell.col_model.depth;
        coverage_cells.push_back(entry);
    }

    write_json_file({{"reference", grid.reference.model_id}, {"cells", coverage_cells}},
                    dir / "coverage_report.json");
    const DepthRecommendation rec = recommend_depth(grid, flags.tau, flags.min_coverage);
    write_json_file(recommendation_to_json(rec, grid.reference), dir / "recommendation.json");
    log_info("wrote " + (dir / "coverage_report.json").string() + " and recommendation.json");
    return 0;
}

int cmd_blocks(const std::string& manifest_arg, const CommonFlags& flags) {
    const fs::path dir = ensure_out_dir(flags.out);
    const CkaConfig cfg = cka_config(flags);
    const SimilarityMatrix S = self_similarity(load_manifest(manifest_arg, flags), cfg);
    const BlockPartition part = segment_blocks(S.values, flags.max_blocks, flags.penalty);
    const std::vector<double> redundancy = layer_redundancy(S.values);

    write_json_file({{"model_id", S.row_model.model_id},
                     {"boundaries", part.boundaries},
                     {"k", part.k},
                     {"within_mean", sig9(part.within_mean)},
                     {"between_mean", sig9(part.between_mean)},
                     {"objective", sig9(part.objective)},
                     {"max_blocks", flags.max_blocks},
                     {"penalty", sig9(flags.penalty)},
                     {"redundancy", sig9(redundancy)}},
                    dir / "blocks.json");

    std::string text = "model " + S.row_model.model_id + ": " + std::to_string(part.k) +
                       " block(s)\n";
    int start = 1;
    for (int b = 0; b < part.k; ++b) {
        char line[128];
        std::snprintf(line, sizeof(line), "  block %d: layers %d-%d (within mean %.4f)\n",
                      b + 1, start, part.boundaries[static_cast<std::size_t>(b)],
                      part.within_mean[static_cast<std::size_t>(b)]);
        text += line;
        start = part.boundaries[static_cast<std::size_t>(b)] + 1;
    }
    char tail[96];
    std::snprintf(tail, sizeof(tail), "  between-block mean %.4f, objective %.4f\n",
                  part.between_mean, part.objective);
    text += tail;
    write_text_file(text, dir / "blocks.txt");
    log_info("wrote " + (dir / "blocks.json").string());
    return 0;
}

int cmd_coverage(const std::string& reference_arg, const std::string& other_arg,
                 const CommonFlags& flags) {
    const fs::path dir = ensure_out_dir(flags.out);
    const CkaConfig cfg = cka_config(flags);
    const SimilarityMatrix S = cross_similarity(load_manifest(reference_arg, flags),
                                                load_manifest(other_arg, flags), cfg);
    const CoverageReport report = coverage(S.values, flags.tau);

    json doc = coverage_to_json(report);
    doc["reference"] = S.row_model.model_id;
    doc["other"] = S.col_model.model_id;
    write_json_file(doc, dir / "coverage.json");

    char line[160];
    std::snprintf(line, sizeof(line),
                  "%s covered by %s at tau=%.3f: %.1f%% (%zu uncovered)\n",
                  S.row_model.model_id.c_str(), S.col_model.model_id.c_str(), report.tau,
                  100.0 * report.coverage_fraction, report.uncovered_layers.size());
    write_text_file(line, dir / "coverage.txt");
    log_info("wrote " + (dir / "coverage.json").string());
    return 0;
}

int cmd_recommend(const std::string& reference_arg, const std::string& others_arg,
                  const CommonFlags& flags) {
    const fs::path dir = ensure_out_dir(flags.out);
    const CkaConfig cfg = cka_config(flags);
    const ComparisonGrid grid = build_grid(reference_arg, others_arg, flags, cfg);
    const DepthRecommendation rec = recommend_depth(grid, flags.tau, flags.min_coverage);
    write_json_file(recommendation_to_json(rec, grid.reference), dir / "recommendation.json");

    std::string text;
    if (rec.depth) {
        text = "recommended depth: " + std::to_string(*rec.depth) + "\n";
    } else {
        text = "no depth reaches coverage " + std::to_string(rec.min_coverage) + "\n";
    }
    write_text_file(text, dir / "recommendation.txt");
    log_info("wrote " + (dir / "recommendation.json").string());
    return 0;
}

int cmd_arch(const std::string& family, int depth, const CommonFlags& flags) {
    const fs::path dir = ensure_out_dir(flags.out);
    ArchDescriptor descriptor;
    try {
        descriptor = family == "physnet3dcnn" ? physnet3dcnn_descriptor(depth)
                                              : tscan_descriptor(depth);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::argument) raise(ErrorKind::usage, e.what());
        throw;
    }
    char name[64];
    std::snprintf(name, sizeof(name), "%s_depth%02d.json", family.c_str(), depth);
    emit_descriptor(descriptor, dir / name);
    log_info("wrote " + (dir / name).string());
    return 0;
}

std::vector<int> parse_depth_list(const std::string& text) {
    std::vector<int> depths;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) {
        const auto dots = token.find("..");
        if (dots != std::string::npos) {
            const int lo = std::stoi(token.substr(0, dots));
            const int hi = std::stoi(token.substr(dots + 2));
            for (int d = lo; d <= hi; ++d) depths.push_back(d);
        } else if (!token.empty()) {
            depths.push_back(std::stoi(token));
        }
    }
    if (depths.empty()) raise(ErrorKind::usage, "no depths in '" + text + "'");
    return depths;
}

struct SynthFlags {
    int layers = 8;
    std::string boundaries = "4,8";
    int n = 128;
    int p = 16;
    double noise = 0.05;
    std::uint64_t seed = 0;
    std::string depths = "2..10";
    std::string groups = "early,late";
    int gate_depth = 5;
    int clips = 48;
    int frames = 60;
    int height = 16;
    int width = 16;
    int features = 16;
    int spatial_layers = 2;
    int temporal_layers = 2;
    std::string transform = "none";
    TransformSpec transform_spec;
};

int cmd_synth_blocks(const SynthFlags& synth, const CommonFlags& flags) {
    const fs::path dir = ensure_out_dir(flags.out);
    PlantedSpec spec;
    spec.n_examples = synth.n;
    spec.feature_dim = synth.p;
    spec.layer_count = synth.layers;
    for (const int b : parse_depth_list(synth.boundaries)) spec.block_boundaries.push_back(b);
    spec.noise_sigma = synth.noise;
    spec.seed = synth.seed;
    const auto manifest = save_activation_set(planted_block_activations(spec), dir);
    log_info("wrote " + manifest.string());
    return 0;
}

int cmd_synth_family(const SynthFlags& synth, const CommonFlags& flags) {
    const fs::path dir = ensure_out_dir(flags.out);
    DepthFamilySpec spec;
    spec.n_examples = synth.n;
    spec.feature_dim = synth.p;
    spec.noise_sigma = synth.noise;
    spec.seed = synth.seed;
    std::istringstream in(synth.groups);
    std::string group;
    while (std::getline(in, group, ',')) {
        if (!group.empty()) spec.groups.push_back(group);
    }
    spec.depths = parse_depth_list(synth.depths);
    for (const int d : spec.depths) {
        // Groups beyond the first are expressed only at or above the gate.
        std::set<std::string> present = {spec.groups.front()};
        if (d >= synth.gate_depth) present.insert(spec.groups.begin(), spec.groups.end());
        spec.shared_groups[d] = std::move(present);
    }

    for (const auto& set : planted_depth_family(spec)) {
        char sub[16];
        std::snprintf(sub, sizeof(sub), "d%02d", set.depth);
        const auto manifest = save_activation_set(set, dir / sub);
        log_debug("wrote " + manifest.string());
    }
    log_info("wrote depth family under " + dir.string());
    return 0;
}

int cmd_synth_sensitivity(const SynthFlags& synth, const CommonFlags& flags) {
    const fs::path dir = ensure_out_dir(flags.out);
    SensitivitySpec spec;
    spec.n_clips = synth.clips;
    spec.frames = synth.frames;
    spec.height = synth.height;
    spec.width = synth.width;
    spec.features_per_layer = synth.features;
    spec.seed = synth.seed;
    for (int i = 0; i < synth.spatial_layers; ++i) {
        spec.layer_tags.push_back(SensitivityTag::spatial);
    }
    for (int i = 0; i < synth.temporal_layers; ++i) {
        spec.layer_tags.push_back(SensitivityTag::temporal);
    }

    std::vector<Clip> clips = sensitivity_clips(spec);
    const TransformTag tag = transform_from_string(synth.transform);
    std::string transform_block;
    if (tag != TransformTag::none) {
        TransformSpec transform = synth.transform_spec;
        transform.set = tag;
        transform.seed = Rng::mix(synth.seed, 55);
        clips = apply_set_all(clips, transform);
        transform_block = serialize_transform_spec(transform);
    }
    const std::string model_id = "sens-" + synth.transform + "-s" + std::to_string(synth.seed);
    ActivationSet set = measure_activations(spec, clips, model_id, tag);
    set.transform_block = transform_block;
    const auto manifest = save_activation_set(set, dir);
    log_info("wrote " + manifest.string());
    return 0;
}

int cmd_heatmap(const std::string& csv_arg, const std::string& out_file,
                const std::string& format, const CommonFlags& flags) {
    if (out_file.empty()) raise(ErrorKind::usage, "--out is required");
    const SimilarityMatrix S = read_similarity_csv(csv_arg);
    render_heatmap(S.values, out_file, palette_from_string(flags.palette), flags.clamp_lo,
                   flags.clamp_hi, heatmap_format_from_string(format));
    log_info("wrote " + out_file);
    return 0;
}

void print_error(ErrorKind kind, const std::string& message) {
    const json doc = {{"error", {{"kind", to_string(kind)}, {"message", message}}}};
    std::cerr << doc.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CKA representation-similarity analysis for layer activations"};
    app.require_subcommand(1);

    CommonFlags flags;
    SynthFlags synth;

    std::vector<std::string> self_manifests;
    auto* self = app.add_subcommand("self", "Self-similarity map of one model");
    self->add_option("manifest", self_manifests, "Activation manifest(s), one per fold")
        ->required();
    self->add_option("--out", flags.out, "Output directory")->required();
    self->add_flag("--average-folds", flags.average_folds, "Average across fold manifests");
    add_cka_flags(self, flags);
    add_render_flags(self, flags);

    std::vector<std::string> cross_manifests;
    auto* cross = app.add_subcommand("cross", "Cross-similarity between two models");
    cross->add_option("manifest", cross_manifests, "Reference and other manifests (pairs)")
        ->required();
    cross->add_option("--out", flags.out, "Output directory")->required();
    cross->add_flag("--average-folds", flags.average_folds, "Average across manifest pairs");
    add_cka_flags(cross, flags);
    add_render_flags(cross, flags);

    std::string grid_reference, grid_others;
    auto* grid = app.add_subcommand("grid",
                                    "One-to-all comparison grid, coverage and recommendation");
    grid->add_option("reference", grid_reference, "Reference manifest")->required();
    grid->add_option("others", grid_others, "Directory of comparison manifests")->required();
    grid->add_option("--out", flags.out, "Output directory")->required();
    grid->add_flag("--average-folds", flags.average_folds, "Average others across folds");
    grid->add_option("--tau", flags.tau, "Coverage threshold in (0,1)");
    grid->add_option("--min-coverage", flags.min_coverage, "Required bidirectional coverage");
    add_cka_flags(grid, flags);
    add_render_flags(grid, flags);

    std::string blocks_manifest;
    auto* blocks = app.add_subcommand("blocks", "Segment a model into similarity blocks");
    blocks->add_option("manifest", blocks_manifest, "Activation manifest")->required();
    blocks->add_option("--out", flags.out, "Output directory")->required();
    blocks->add_option("--max-blocks", flags.max_blocks, "Maximum number of blocks");
    blocks->add_option("--penalty", flags.penalty, "Per-block objective penalty");
    add_cka_flags(blocks, flags);

    std::string coverage_reference, coverage_other;
    auto* cover = app.add_subcommand("coverage", "Layer coverage of one model by another");
    cover->add_option("reference", coverage_reference, "Reference manifest")->required();
    cover->add_option("other", coverage_other, "Comparison manifest")->required();
    cover->add_option("--out", flags.out, "Output directory")->required();
    cover->add_option("--tau", flags.tau, "Coverage threshold in (0,1)");
    add_cka_flags(cover, flags);

    std::string rec_reference, rec_others;
    auto* recommend = app.add_subcommand("recommend", "Smallest depth with full coverage");
    recommend->add_option("reference", rec_reference, "Reference manifest")->required();
    recommend->add_option("others", rec_others, "Directory of candidate manifests")->required();
    recommend->add_option("--out", flags.out, "Output directory")->required();
    recommend->add_flag("--average-folds", flags.average_folds,
                        "Average candidates across folds");
    recommend->add_option("--tau", flags.tau, "Coverage threshold in (0,1)");
    recommend->add_option("--min-coverage", flags.min_coverage,
                          "Required bidirectional coverage");
    add_cka_flags(recommend, flags);

    std::string arch_family;
    int arch_depth = 0;
    auto* arch = app.add_subcommand("arch", "Emit a validated architecture descriptor");
    arch->add_option("family", arch_family, "physnet3dcnn or tscan")
        ->required()
        ->check(CLI::IsMember({"physnet3dcnn", "tscan"}));
    arch->add_option("depth", arch_depth, "Layer depth (3DCNN) or meta-depth (tscan)")
        ->required();
    arch->add_option("--out", flags.out, "Output directory")->required();

    auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic activation fixtures");
    synth_cmd->require_subcommand(1);
    std::uint64_t seed_arg = 0;

    auto* synth_blocks = synth_cmd->add_subcommand("blocks", "Planted block-structured model");
    synth_blocks->add_option("--layers", synth.layers, "Layer count");
    synth_blocks->add_option("--boundaries", synth.boundaries,
                             "Comma-separated block end layers, e.g. 4,8");
    synth_blocks->add_option("--n", synth.n, "Example count");
    synth_blocks->add_option("--p", synth.p, "Feature dimension per layer");
    synth_blocks->add_option("--noise", synth.noise, "Per-layer noise sigma");
    synth_blocks->add_option("--seed", seed_arg, "Random seed");
    synth_blocks->add_option("--out", flags.out, "Output directory")->required();

    auto* synth_family = synth_cmd->add_subcommand("family",
                                                   "Depth family with a gated late group");
    synth_family->add_option("--depths", synth.depths, "Depths, e.g. 2..10 or 2,3,5");
    synth_family->add_option("--groups", synth.groups, "Ordered group names");
    synth_family->add_option("--gate-depth", synth.gate_depth,
                             "Depth at which the later groups appear");
    synth_family->add_option("--n", synth.n, "Example count");
    synth_family->add_option("--p", synth.p, "Feature dimension per layer");
    synth_family->add_option("--noise", synth.noise, "Per-layer noise sigma");
    synth_family->add_option("--seed", seed_arg, "Random seed");
    synth_family->add_option("--out", flags.out, "Output directory")->required();

    auto* synth_sens = synth_cmd->add_subcommand(
        "sensitivity", "Probe activations over a synthetic clip corpus");
    synth_sens->add_option("--clips", synth.clips, "Clip count");
    synth_sens->add_option("--frames", synth.frames, "Frames per clip");
    synth_sens->add_option("--height", synth.height, "Frame height");
    synth_sens->add_option("--width", synth.width, "Frame width");
    synth_sens->add_option("--features", synth.features, "Features per layer");
    synth_sens->add_option("--spatial-layers", synth.spatial_layers,
                           "Number of spatial-tagged layers");
    synth_sens->add_option("--temporal-layers", synth.temporal_layers,
                           "Number of temporal-tagged layers");
    synth_sens->add_option("--transform", synth.transform,
                           "Transform set applied to the clips")
        ->check(CLI::IsMember({"none", "spatial", "temporal", "all"}));
    synth_sens->add_option("--flip-prob", synth.transform_spec.flip_prob, "Flip probability");
    synth_sens->add_option("--illum-amplitude", synth.transform_spec.illum_amplitude,
                           "Illumination offset amplitude");
    synth_sens->add_option("--blur-sigma", synth.transform_spec.blur_sigma, "Blur sigma");
    synth_sens->add_option("--speed-base", synth.transform_spec.speed_base, "Playback speed");
    synth_sens->add_option("--speed-mod-amplitude", synth.transform_spec.speed_mod_amplitude,
                           "Speed modulation amplitude");
    synth_sens->add_option("--speed-mod-freq", synth.transform_spec.speed_mod_freq,
                           "Speed modulation frequency (Hz)");
    synth_sens->add_option("--seed", seed_arg, "Random seed");
    synth_sens->add_option("--out", flags.out, "Output directory")->required();

    std::string heatmap_csv, heatmap_out, heatmap_format = "pgm";
    auto* heatmap = app.add_subcommand("heatmap", "Render a similarity CSV as an image");
    heatmap->add_option("csv", heatmap_csv, "Similarity CSV file")->required();
    heatmap->add_option("--out", heatmap_out, "Output image path")->required();
    heatmap->add_option("--format", heatmap_format, "pgm or svg")
        ->check(CLI::IsMember({"pgm", "svg"}));
    add_render_flags(heatmap, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error(ErrorKind::usage, e.what());
        return 2;
    }

    try {
        synth.seed = seed_arg;
        if (self->parsed()) return cmd_self(self_manifests, flags);
        if (cross->parsed()) return cmd_cross(cross_manifests, flags);
        if (grid->parsed()) return cmd_grid(grid_reference, grid_others, flags);
        if (blocks->parsed()) return cmd_blocks(blocks_manifest, flags);
        if (cover->parsed()) return cmd_coverage(coverage_reference, coverage_other, flags);
        if (recommend->parsed()) return cmd_recommend(rec_reference, rec_others, flags);
        if (arch->parsed()) return cmd_arch(arch_family, arch_depth, flags);
        if (synth_cmd->parsed()) {
            if (synth_blocks->parsed()) return cmd_synth_blocks(synth, flags);
            if (synth_family->parsed()) return cmd_synth_family(synth, flags);
            if (synth_sens->parsed()) return cmd_synth_sensitivity(synth, flags);
        }
        if (heatmap->parsed()) return cmd_heatmap(heatmap_csv, heatmap_out, heatmap_format, flags);
        print_error(ErrorKind::usage, "no subcommand given");
        return 2;
    } catch (const Error& e) {
        print_error(e.kind(), e.what());
        return user_fault(e.kind()) ? 2 : 1;
    } catch (const std::exception& e) {
        print_error(ErrorKind::internal, e.what());
        return 1;
    }
}
