#include "repsim/synth.hpp"

#include "repsim/error.hpp"
#include "repsim/rng.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace repsim {

namespace {

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.gaussian();
    }
    return m;
}

Eigen::MatrixXd random_orthogonal_from(Rng& rng, int p) {
    const Eigen::MatrixXd g = gaussian_matrix(p, p, rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(p, p);
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < p; ++j) {
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    if (q.determinant() < 0.0) q.col(p - 1) = -q.col(p - 1);
    return q;
}

std::string hash_token(std::uint64_t seed, int n) {
    return "synth-" + std::to_string(seed) + "-" + std::to_string(n);
}

}  // namespace

Eigen::MatrixXd random_orthogonal(int p, std::uint64_t seed) {
    if (p < 1) raise(ErrorKind::argument, "random_orthogonal: dimension must be positive");
    Rng rng(seed);
    return random_orthogonal_from(rng, p);
}

void PlantedSpec::check() const {
    if (n_examples < 4) raise(ErrorKind::argument, "planted spec needs n_examples >= 4");
    if (feature_dim < 1) raise(ErrorKind::argument, "planted spec needs feature_dim >= 1");
    if (layer_count < 1) raise(ErrorKind::argument, "planted spec needs layer_count >= 1");
    if (block_boundaries.empty() || block_boundaries.back() != layer_count) {
        raise(ErrorKind::argument, "block boundaries must end at layer_count");
    }
    int prev = 0;
    for (int b : block_boundaries) {
        if (b <= prev) raise(ErrorKind::argument, "block boundaries must be strictly increasing");
        prev = b;
    }
    if (noise_sigma < 0.0) raise(ErrorKind::argument, "noise_sigma must be >= 0");
    if (!sensitivity_tags.empty() &&
        sensitivity_tags.size() != static_cast<std::size_t>(layer_count)) {
        raise(ErrorKind::argument, "sensitivity_tags must have one entry per layer");
    }
}

ActivationSet planted_block_activations(const PlantedSpec& spec) {
    spec.check();
    const int n = spec.n_examples;
    const int p = spec.feature_dim;

    ActivationSet set;
    set.model_id = "synth-blocks-s" + std::to_string(spec.seed);
    set.family = ModelFamily::physnet3dcnn;
    set.depth = spec.layer_count;
    set.fold = 0;
    set.transform = TransformTag::none;
    set.examples_hash = hash_token(spec.seed, n);

    // One shared base per block, then per layer a fresh rotation plus
    // fresh noise: Z_b R + sigma E.
    std::vector<Eigen::MatrixXd> bases;
    for (std::size_t b = 0; b < spec.block_boundaries.size(); ++b) {
        Rng rng(Rng::mix(spec.seed, 10 + b));
        bases.push_back(gaussian_matrix(n, p, rng));
    }

    int block = 0;
    for (int layer = 1; layer <= spec.layer_count; ++layer) {
        if (layer > spec.block_boundaries[static_cast<std::size_t>(block)]) ++block;
        Rng rng(Rng::mix(spec.seed, 1000 + static_cast<std::uint64_t>(layer)));
        const Eigen::MatrixXd rot = random_orthogonal_from(rng, p);
        Eigen::MatrixXd data = bases[static_cast<std::size_t>(block)] * rot;
        if (spec.noise_sigma > 0.0) {
            data += spec.noise_sigma * gaussian_matrix(n, p, rng);
        }
        LayerActivations la;
        la.index = layer;
        la.name = "layer" + std::to_string(layer);
        la.data = std::move(data);
        la.source_shape = {static_cast<std::size_t>(n), static_cast<std::size_t>(p)};
        set.layers.push_back(std::move(la));
    }
    return set;
}

ActivationSet rotated_copy(const ActivationSet& A, std::uint64_t seed) {
    A.check_invariants();
    ActivationSet out = A;
    out.model_id = A.model_id + "-rot";
    for (std::size_t i = 0; i < out.layers.size(); ++i) {
        Rng rng(Rng::mix(seed, i));
        const int p = static_cast<int>(out.layers[i].data.cols());
        out.layers[i].data = A.layers[i].data * random_orthogonal_from(rng, p);
    }
    return out;
}

void DepthFamilySpec::check() const {
    if (n_examples < 4) raise(ErrorKind::argument, "family spec needs n_examples >= 4");
    if (feature_dim < 1) raise(ErrorKind::argument, "family spec needs feature_dim >= 1");
    if (noise_sigma < 0.0) raise(ErrorKind::argument, "noise_sigma must be >= 0");
    if (groups.empty()) raise(ErrorKind::argument, "family spec needs at least one group");
    if (depths.empty()) raise(ErrorKind::argument, "family spec needs at least one depth");
    for (int d : depths) {
        if (d < 1) raise(ErrorKind::argument, "depths must be positive");
        const auto it = shared_groups.find(d);
        if (it == shared_groups.end()) {
            raise(ErrorKind::argument,
                  "shared_groups is missing an entry for depth " + std::to_string(d));
        }
        for (const std::string& g : it->second) {
            if (std::find(groups.begin(), groups.end(), g) == groups.end()) {
                raise(ErrorKind::argument, "shared group '" + g + "' is not a known group");
            }
        }
    }
}

std::vector<ActivationSet> planted_depth_family(const DepthFamilySpec& spec) {
    spec.check();
    const int n = spec.n_examples;
    const int p = spec.feature_dim;
    const int group_count = static_cast<int>(spec.groups.size());

    std::vector<Eigen::MatrixXd> group_bases;
    for (int g = 0; g < group_count; ++g) {
        Rng rng(Rng::mix(spec.seed, 10 + static_cast<std::uint64_t>(g)));
        group_bases.push_back(gaussian_matrix(n, p, rng));
    }

    std::vector<ActivationSet> family;
    for (int depth : spec.depths) {
        ActivationSet set;
        set.model_id = "synth-d" + std::to_string(depth);
        set.family = ModelFamily::physnet3dcnn;
        set.depth = depth;
        set.fold = 0;
        set.transform = TransformTag::none;
        set.examples_hash = hash_token(spec.seed, n);

        const std::set<std::string>& present = spec.shared_groups.at(depth);
        for (int layer = 1; layer <= depth; ++layer) {
            // Layer positions map proportionally onto the global group list.
            const int g = (layer - 1) * group_count / depth;
            Rng rng(Rng::mix(spec.seed,
                             1000000 + static_cast<std::uint64_t>(depth) * 1000 +
                                 static_cast<std::uint64_t>(layer)));
            Eigen::MatrixXd base;
            if (present.count(spec.groups[static_cast<std::size_t>(g)]) > 0) {
                base = group_bases[static_cast<std::size_t>(g)];
            } else {
                base = gaussian_matrix(n, p, rng);  // group absent: fresh independent base
            }
            const Eigen::MatrixXd rot = random_orthogonal_from(rng, p);
            Eigen::MatrixXd data = base * rot;
            if (spec.noise_sigma > 0.0) data += spec.noise_sigma * gaussian_matrix(n, p, rng);

            LayerActivations la;
            la.index = layer;
            la.name = "layer" + std::to_string(layer);
            la.data = std::move(data);
            la.source_shape = {static_cast<std::size_t>(n), static_cast<std::size_t>(p)};
            set.layers.push_back(std::move(la));
        }
        family.push_back(std::move(set));
    }
    return family;
}

void SensitivitySpec::check() const {
    if (n_clips < 4) raise(ErrorKind::argument, "sensitivity spec needs n_clips >= 4");
    if (frames < 2) raise(ErrorKind::argument, "sensitivity spec needs frames >= 2");
    if (height < 2 || width < 2) raise(ErrorKind::argument, "frame axes must be >= 2");
    if (!(frame_rate > 0.0)) raise(ErrorKind::argument, "frame rate must be positive");
    if (features_per_layer < 1) raise(ErrorKind::argument, "features_per_layer must be >= 1");
    if (layer_tags.empty()) raise(ErrorKind::argument, "layer_tags must not be empty");
}

std::vector<Clip> sensitivity_clips(const SensitivitySpec& spec) {
    spec.check();
    std::vector<Clip> clips;
    clips.reserve(static_cast<std::size_t>(spec.n_clips));
    for (int i = 0; i < spec.n_clips; ++i) {
        Rng rng(Rng::mix(spec.seed, 2000000 + static_cast<std::uint64_t>(i)));
        Clip clip(spec.frames, 1, spec.height, spec.width, spec.frame_rate);

        // Separable content: per-clip random texture plus a global
        // temporal oscillation, scaled to stay inside [0,1] unclamped.
        Eigen::MatrixXd texture(spec.height, spec.width);
        for (int y = 0; y < spec.height; ++y) {
            for (int x = 0; x < spec.width; ++x) texture(y, x) = rng.uniform(-1.0, 1.0);
        }
        const double cycles = rng.uniform(1.5, 6.0);
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);

        for (int t = 0; t < spec.frames; ++t) {
            const double wave =
                std::sin(2.0 * std::numbers::pi * cycles * t / spec.frames + phase);
            for (int y = 0; y < spec.height; ++y) {
                for (int x = 0; x < spec.width; ++x) {
                    clip.at(t, 0, y, x) = 0.5 + 0.22 * texture(y, x) + 0.22 * wave;
                }
            }
        }
        clips.push_back(std::move(clip));
    }
    return clips;
}

std::vector<Clip> apply_set_all(const std::vector<Clip>& clips, const TransformSpec& spec) {
    std::vector<Clip> out;
    out.reserve(clips.size());
    for (std::size_t i = 0; i < clips.size(); ++i) {
        TransformSpec per_clip = spec;
        per_clip.seed = Rng::mix(spec.seed, 3000000 + i);
        out.push_back(apply_set(clips[i], per_clip));
    }
    return out;
}

ActivationSet measure_activations(const SensitivitySpec& spec, const std::vector<Clip>& clips,
                                  const std::string& model_id, TransformTag transform) {
    spec.check();
    if (clips.size() != static_cast<std::size_t>(spec.n_clips)) {
        raise(ErrorKind::argument, "clip count does not match the sensitivity spec");
    }
    for (const Clip& clip : clips) {
        clip.check();
        if (clip.frames != spec.frames || clip.height != spec.height ||
            clip.width != spec.width) {
            raise(ErrorKind::argument, "clip axes do not match the sensitivity spec");
        }
    }

    ActivationSet set;
    set.model_id = model_id;
    set.family = ModelFamily::physnet3dcnn;
    set.depth = static_cast<int>(spec.layer_tags.size());
    set.fold = 0;
    set.transform = transform;
    set.examples_hash = "sens-" + std::to_string(spec.seed) + "-" + std::to_string(spec.n_clips);

    for (std::size_t l = 0; l < spec.layer_tags.size(); ++l) {
        // Probe placement depends only on (seed, layer) so clean and
        // transformed corpora are measured identically.
        Rng rng(Rng::mix(spec.seed, 4000000 + l));
        const SensitivityTag tag = spec.layer_tags[l];

        Eigen::MatrixXd data(spec.n_clips, spec.features_per_layer);
        for (int f = 0; f < spec.features_per_layer; ++f) {
            const int py = static_cast<int>(rng.uniform01() * spec.height) % spec.height;
            const int px = static_cast<int>(rng.uniform01() * spec.width) % spec.width;
            const int pt = static_cast<int>(rng.uniform01() * spec.frames) % spec.frames;
            for (int i = 0; i < spec.n_clips; ++i) {
                const Clip& clip = clips[static_cast<std::size_t>(i)];
                double value = 0.0;
                if (tag == SensitivityTag::spatial) {
                    // Time mean at a fixed pixel: spatially sensitive,
                    // temporally stable.
                    for (int t = 0; t < clip.frames; ++t) value += clip.at(t, 0, py, px);
                    value /= clip.frames;
                } else if (tag == SensitivityTag::temporal) {
                    // Frame mean at a fixed time: temporally sensitive,
                    // flip-invariant and blur-stable.
                    for (int y = 0; y < clip.height; ++y) {
                        for (int x = 0; x < clip.width; ++x) value += clip.at(pt, 0, y, x);
                    }
                    value /= static_cast<double>(clip.height) * clip.width;
                } else {
                    value = clip.at(pt, 0, py, px);
                }
                data(i, f) = value;
            }
        }

        LayerActivations la;
        la.index = static_cast<int>(l) + 1;
        la.name = std::string("probe_") + (tag == SensitivityTag::spatial
                                               ? "spatial"
                                               : tag == SensitivityTag::temporal ? "temporal"
                                                                                 : "point") +
                  std::to_string(l + 1);
        la.data = std::move(data);
        la.source_shape = {static_cast<std::size_t>(spec.n_clips),
                           static_cast<std::size_t>(spec.features_per_layer)};
        set.layers.push_back(std::move(la));
    }
    return set;
}

}  // namespace repsim
