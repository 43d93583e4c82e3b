#include "repsim/activation_set.hpp"

#include "repsim/error.hpp"
#include "repsim/npy.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>

namespace repsim {

using nlohmann::json;

const char* to_string(ModelFamily family) noexcept {
    return family == ModelFamily::physnet3dcnn ? "physnet3dcnn" : "tscan";
}

const char* to_string(TransformTag tag) noexcept {
    switch (tag) {
        case TransformTag::none: return "none";
        case TransformTag::spatial: return "spatial";
        case TransformTag::temporal: return "temporal";
        case TransformTag::all: return "all";
    }
    return "none";
}

ModelFamily family_from_string(const std::string& s) {
    if (s == "physnet3dcnn") return ModelFamily::physnet3dcnn;
    if (s == "tscan") return ModelFamily::tscan;
    raise(ErrorKind::manifest, "unknown family '" + s + "'");
}

TransformTag transform_from_string(const std::string& s) {
    if (s == "none") return TransformTag::none;
    if (s == "spatial") return TransformTag::spatial;
    if (s == "temporal") return TransformTag::temporal;
    if (s == "all") return TransformTag::all;
    raise(ErrorKind::manifest, "unknown transform tag '" + s + "'");
}

void ActivationSet::check_invariants() const {
    if (layers.empty()) raise(ErrorKind::manifest, model_id + ": no layers");
    int prev_index = 0;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& layer = layers[i];
        if (i == 0 && layer.index != 1) {
            raise(ErrorKind::manifest,
                  model_id + ": layer indices must start at 1, got " +
                      std::to_string(layer.index));
        }
        if (layer.index <= prev_index) {
            raise(ErrorKind::manifest,
                  model_id + ": layer indices must be strictly increasing (" +
                      std::to_string(layer.index) + " after " + std::to_string(prev_index) + ")");
        }
        prev_index = layer.index;
        if (layer.data.cols() < 1) {
            raise(ErrorKind::consistency,
                  model_id + " layer " + std::to_string(layer.index) + ": empty feature axis");
        }
        if (!layer.data.allFinite()) {
            raise(ErrorKind::data,
                  model_id + " layer " + std::to_string(layer.index) + ": non-finite values");
        }
        if (layer.data.rows() != layers.front().data.rows()) {
            raise(ErrorKind::consistency,
                  model_id + " layer " + std::to_string(layer.index) + ": example count " +
                      std::to_string(layer.data.rows()) + " != " +
                      std::to_string(layers.front().data.rows()));
        }
    }
    if (layers.front().data.rows() < 4) {
        raise(ErrorKind::consistency,
              model_id + ": fewer than 4 examples (" +
                  std::to_string(layers.front().data.rows()) + ")");
    }
}

namespace {

json parse_manifest_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::io, "cannot open manifest " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        raise(ErrorKind::manifest, path.string() + ": " + e.what());
    }
    if (!doc.is_object()) raise(ErrorKind::manifest, path.string() + ": not a JSON object");
    return doc;
}

template <typename T>
T require_field(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) {
        raise(ErrorKind::manifest, where + ": missing field '" + key + "'");
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        raise(ErrorKind::manifest, where + ": field '" + key + "' has the wrong type");
    }
}

}  // namespace

ActivationSet load_activation_set(const std::filesystem::path& manifest_path, FlattenMode mode) {
    const json doc = parse_manifest_file(manifest_path);
    const std::string where = manifest_path.string();

    ActivationSet set;
    set.model_id = require_field<std::string>(doc, "model_id", where);
    set.family = family_from_string(require_field<std::string>(doc, "family", where));
    set.depth = require_field<int>(doc, "depth", where);
    set.fold = require_field<int>(doc, "fold", where);
    set.transform = transform_from_string(require_field<std::string>(doc, "transform", where));
    if (doc.contains("examples_hash")) {
        set.examples_hash = require_field<std::string>(doc, "examples_hash", where);
    }
    if (doc.contains("transform_spec")) {
        if (!doc.at("transform_spec").is_object()) {
            raise(ErrorKind::manifest, where + ": transform_spec must be an object");
        }
        set.transform_block = doc.at("transform_spec").dump();
    }
    if (set.fold < 0) raise(ErrorKind::manifest, where + ": fold must be >= 0");
    if (!doc.contains("layers") || !doc.at("layers").is_array() || doc.at("layers").empty()) {
        raise(ErrorKind::manifest, where + ": 'layers' must be a non-empty array");
    }

    const std::filesystem::path base = manifest_path.parent_path();
    std::vector<int> seen;
    for (const auto& entry : doc.at("layers")) {
        LayerActivations layer;
        layer.index = require_field<int>(entry, "index", where);
        layer.name = require_field<std::string>(entry, "name", where);
        const auto file = require_field<std::string>(entry, "file", where);
        const auto declared = require_field<std::vector<std::size_t>>(entry, "shape", where);

        if (std::find(seen.begin(), seen.end(), layer.index) != seen.end()) {
            raise(ErrorKind::manifest,
                  where + ": duplicate layer index " + std::to_string(layer.index));
        }
        seen.push_back(layer.index);

        const Tensor tensor = read_array(base / file);
        if (tensor.shape() != declared) {
            raise(ErrorKind::manifest, where + ": layer " + std::to_string(layer.index) +
                                           " declared shape does not match " + file);
        }
        layer.source_shape = tensor.shape();
        layer.data = flatten_layer(tensor, mode);
        set.layers.push_back(std::move(layer));
    }

    std::sort(set.layers.begin(), set.layers.end(),
              [](const LayerActivations& a, const LayerActivations& b) { return a.index < b.index; });
    set.check_invariants();
    return set;
}

std::filesystem::path save_activation_set(const ActivationSet& set,
                                          const std::filesystem::path& dir) {
    set.check_invariants();
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) raise(ErrorKind::io, "cannot create directory " + dir.string());

    json layers = json::array();
    for (const auto& layer : set.layers) {
        char file[32];
        std::snprintf(file, sizeof(file), "layer_%03d.npy", layer.index);

        std::vector<std::size_t> shape = layer.source_shape;
        if (shape.empty()) {
            shape = {static_cast<std::size_t>(layer.data.rows()),
                     static_cast<std::size_t>(layer.data.cols())};
        }
        std::vector<double> values(layer.data.size());
        for (Eigen::Index i = 0; i < layer.data.rows(); ++i) {
            for (Eigen::Index j = 0; j < layer.data.cols(); ++j) {
                values[static_cast<std::size_t>(i) * layer.data.cols() + j] = layer.data(i, j);
            }
        }
        // Flattened matrices round-trip as 2-d arrays regardless of the
        // original source shape.
        write_array(Tensor({static_cast<std::size_t>(layer.data.rows()),
                            static_cast<std::size_t>(layer.data.cols())},
                           std::move(values)),
                    dir / file);

        layers.push_back({{"index", layer.index},
                          {"name", layer.name},
                          {"file", file},
                          {"shape", {layer.data.rows(), layer.data.cols()}}});
    }

    json doc = {{"model_id", set.model_id},
                {"family", to_string(set.family)},
                {"depth", set.depth},
                {"fold", set.fold},
                {"transform", to_string(set.transform)},
                {"layers", layers}};
    if (!set.examples_hash.empty()) doc["examples_hash"] = set.examples_hash;
    if (!set.transform_block.empty()) {
        try {
            doc["transform_spec"] = json::parse(set.transform_block);
        } catch (const json::parse_error&) {
            raise(ErrorKind::manifest, set.model_id + ": transform_block is not valid JSON");
        }
    }

    const std::filesystem::path manifest = dir / "manifest.json";
    std::ofstream out(manifest, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::io, "cannot write " + manifest.string());
    out << doc.dump(2) << "\n";
    if (!out) raise(ErrorKind::io, "write failed for " + manifest.string());
    return manifest;
}

}  // namespace repsim
