#include "repsim/arch.hpp"

#include "repsim/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <utility>

namespace repsim {

using nlohmann::json;

const char* to_string(LayerOp op) noexcept {
    switch (op) {
        case LayerOp::conv3d: return "conv3d";
        case LayerOp::conv2d: return "conv2d";
        case LayerOp::tsm_conv2d: return "tsm-conv2d";
        case LayerOp::attention_mix: return "attention-mix";
    }
    return "conv3d";
}

const char* to_string(ActivationKind a) noexcept {
    switch (a) {
        case ActivationKind::none: return "none";
        case ActivationKind::relu: return "relu";
        case ActivationKind::tanh: return "tanh";
        case ActivationKind::sigmoid: return "sigmoid";
    }
    return "none";
}

const char* to_string(BranchTag b) noexcept {
    switch (b) {
        case BranchTag::trunk: return "trunk";
        case BranchTag::diff: return "diff";
        case BranchTag::raw: return "raw";
        case BranchTag::mix: return "mix";
    }
    return "trunk";
}

const char* to_string(PoolKind k) noexcept {
    return k == PoolKind::max ? "max" : "avg";
}

namespace {

template <typename E>
E enum_from_string(const std::string& s, std::initializer_list<std::pair<const char*, E>> table,
                   const char* what) {
    for (const auto& [name, value] : table) {
        if (s == name) return value;
    }
    raise(ErrorKind::format, std::string("unknown ") + what + " '" + s + "'");
}

// Pooling placements for the 3DCNN family, depth 2..15. Index/stride pairs;
// the last pooling is average, the rest max.
struct PoolRow {
    std::vector<int> indices;
    std::vector<int> strides;
};

const std::map<int, PoolRow> k3dcnnPooling = {
    {2, {{1}, {64}}},
    {3, {{1, 2}, {8, 8}}},
    {4, {{1, 2, 3}, {4, 4, 4}}},
    {5, {{1, 2, 3, 4}, {2, 4, 2, 4}}},
    {6, {{1, 2, 3, 4, 5}, {2, 2, 2, 2, 4}}},
    {7, {{1, 2, 3, 4, 5, 6}, {2, 2, 2, 2, 2, 2}}},
    {8, {{1, 2, 3, 4, 5, 7}, {2, 2, 2, 2, 2, 2}}},
    {9, {{1, 2, 3, 4, 6, 8}, {2, 2, 2, 2, 2, 2}}},
    {10, {{1, 2, 3, 5, 7, 9}, {2, 2, 2, 2, 2, 2}}},
    {11, {{1, 2, 4, 6, 8, 10}, {2, 2, 2, 2, 2, 2}}},
    {12, {{1, 3, 5, 7, 9, 11}, {2, 2, 2, 2, 2, 2}}},
    {13, {{2, 4, 5, 8, 10, 12}, {2, 2, 2, 2, 2, 2}}},
    {14, {{3, 5, 7, 9, 11, 13}, {2, 2, 2, 2, 2, 2}}},
    {15, {{4, 6, 8, 10, 12, 14}, {2, 2, 2, 2, 2, 2}}},
};

// Average-pooled meta-layers for the TS-CAN family, meta-depth 1..10.
const std::map<int, std::vector<int>> kTscanPooling = {
    {1, {1}},
    {2, {1, 2}},
    {3, {1, 2, 3}},
    {4, {1, 2, 3, 4}},
    {5, {1, 3, 4, 5}},
    {6, {1, 3, 5, 6}},
    {7, {1, 3}},
    {8, {1, 3}},
    {9, {1, 3}},
    {10, {1}},
};

}  // namespace

int ArchDescriptor::final_resolution() const {
    int res = input_spatial;
    for (const auto& pool : pooling) res /= pool.stride;
    return res;
}

ArchDescriptor physnet3dcnn_descriptor(int depth) {
    if (depth < 2 || depth > 15) {
        raise(ErrorKind::argument,
              "physnet3dcnn depth must be in [2,15], got " + std::to_string(depth));
    }

    ArchDescriptor d;
    d.family = ModelFamily::physnet3dcnn;
    d.depth = depth;
    d.input_spatial = 64;
    d.input_frames = 136;

    for (int i = 1; i <= depth; ++i) {
        LayerSpec layer;
        layer.index = i;
        layer.op = LayerOp::conv3d;
        layer.branch = BranchTag::trunk;
        const bool final_layer = i == depth;
        if (i == 1) {
            layer.kernel = {1, 5, 5};
            layer.in_channels = 3;
            layer.out_channels = 32;
        } else if (final_layer) {
            layer.kernel = {1, 1, 1};
            layer.in_channels = d.layers.back().out_channels;
            layer.out_channels = 1;
        } else {
            layer.kernel = {5, 3, 3};
            layer.in_channels = d.layers.back().out_channels;
            layer.out_channels = 64;
        }
        if (!final_layer) {
            layer.batch_norm = true;
            layer.activation = ActivationKind::relu;
            if (i % 2 == 1 && i > 1) layer.dropout = 0.5;
        }
        d.layers.push_back(layer);
    }

    const PoolRow& row = k3dcnnPooling.at(depth);
    for (std::size_t p = 0; p < row.indices.size(); ++p) {
        d.pooling.push_back({row.indices[p], row.strides[p],
                             p + 1 == row.indices.size() ? PoolKind::avg : PoolKind::max});
    }
    return d;
}

ArchDescriptor tscan_descriptor(int meta_depth) {
    if (meta_depth < 1 || meta_depth > 10) {
        raise(ErrorKind::argument,
              "tscan meta-depth must be in [1,10], got " + std::to_string(meta_depth));
    }

    ArchDescriptor d;
    d.family = ModelFamily::tscan;
    d.depth = meta_depth;
    d.input_spatial = 64;
    d.input_frames = 20;

    const std::vector<int>& pooled = kTscanPooling.at(meta_depth);
    int index = 0;
    int in_channels = 3;
    for (int m = 1; m <= meta_depth; ++m) {
        // Published channel plan: 32 in the first meta-layer, 64 after.
        const int channels = m == 1 ? 32 : 64;
        const bool pooled_here =
            std::find(pooled.begin(), pooled.end(), m) != pooled.end();
        const double dropout = pooled_here ? 0.25 : 0.0;

        LayerSpec diff1{++index, LayerOp::tsm_conv2d, {3, 3}, in_channels, channels,
                        false,   ActivationKind::tanh, 0.0,   BranchTag::diff, m};
        LayerSpec diff2{++index, LayerOp::tsm_conv2d, {3, 3}, channels, channels,
                        false,   ActivationKind::tanh, dropout, BranchTag::diff, m};
        LayerSpec raw1{++index, LayerOp::conv2d, {3, 3}, in_channels, channels,
                       false,   ActivationKind::tanh, 0.0,   BranchTag::raw, m};
        LayerSpec raw2{++index, LayerOp::conv2d, {3, 3}, channels, channels,
                       false,   ActivationKind::tanh, dropout, BranchTag::raw, m};
        LayerSpec mix{++index, LayerOp::attention_mix, {1, 1}, channels, 1,
                      false,   ActivationKind::sigmoid, 0.0,   BranchTag::mix, m};
        d.layers.insert(d.layers.end(), {diff1, diff2, raw1, raw2, mix});
        in_channels = channels;
    }

    for (int m : pooled) d.pooling.push_back({m, 2, PoolKind::avg});
    return d;
}

std::vector<Violation> validate(const ArchDescriptor& d) {
    std::vector<Violation> out;
    const auto add = [&](const std::string& rule, const std::string& message) {
        out.push_back({rule, message});
    };

    if (d.layers.empty()) add("layers-nonempty", "descriptor has no layers");
    for (const auto& layer : d.layers) {
        const std::string where = "layer " + std::to_string(layer.index);
        if (layer.in_channels <= 0 || layer.out_channels <= 0) {
            add("channels-positive", where + ": channel counts must be positive");
        }
        for (int k : layer.kernel) {
            if (k <= 0) add("kernel-positive", where + ": kernel dims must be positive");
            else if (k % 2 == 0) add("kernel-odd", where + ": kernel dims must be odd");
        }
    }
    for (std::size_t i = 1; i < d.layers.size(); ++i) {
        if (d.layers[i].index <= d.layers[i - 1].index) {
            add("layer-order", "layer indices must be strictly increasing");
            break;
        }
    }

    int last_pool_index = 0;
    for (const auto& pool : d.pooling) {
        if (pool.index <= last_pool_index) {
            add("pooling-order", "pooling indices must be strictly increasing");
        }
        last_pool_index = pool.index;
        if (pool.stride <= 0) add("pooling-stride-positive", "pooling stride must be positive");
    }

    if (d.family == ModelFamily::physnet3dcnn) {
        if (d.depth != static_cast<int>(d.layers.size())) {
            add("depth-matches-layers", "depth does not equal the layer count");
        }
        long long product = 1;
        for (const auto& pool : d.pooling) product *= pool.stride;
        if (product != 64) {
            add("pooling-stride-product",
                "spatial stride product is " + std::to_string(product) +
                    ", must be 64 (reduces 64x64 input to 1x1)");
        }
        for (std::size_t p = 0; p < d.pooling.size(); ++p) {
            const bool last = p + 1 == d.pooling.size();
            if (last && d.pooling[p].kind != PoolKind::avg) {
                add("pooling-final-avg", "final pooling must be average");
            }
            if (!last && d.pooling[p].kind != PoolKind::max) {
                add("pooling-early-max", "all poolings before the final must be max");
            }
            if (d.pooling[p].index > d.depth - 1 || d.pooling[p].index < 1) {
                add("pooling-index-range",
                    "pooling index " + std::to_string(d.pooling[p].index) +
                        " outside [1, depth-1]");
            }
        }
    } else {
        if (static_cast<int>(d.layers.size()) != 5 * d.depth) {
            add("depth-matches-layers", "tscan expects 5 layer entries per meta-layer");
        }
        int res = d.input_spatial;
        for (const auto& pool : d.pooling) {
            if (pool.stride != 2) {
                add("pooling-stride-two", "tscan pooling strides must all be 2");
            }
            if (pool.kind != PoolKind::avg) {
                add("pooling-kind-avg", "tscan poolings are average poolings");
            }
            if (pool.index > d.depth || pool.index < 1) {
                add("pooling-index-range", "pooling index " + std::to_string(pool.index) +
                                               " outside [1, depth]");
            }
            res /= pool.stride;
        }
        if (res < 1) {
            add("pooling-resolution", "pooled resolution falls below 1x1");
        }
    }
    return out;
}

long long layer_param_count(const LayerSpec& layer) {
    long long kernel_volume = 1;
    for (int k : layer.kernel) kernel_volume *= k;
    long long total =
        kernel_volume * layer.in_channels * layer.out_channels + layer.out_channels;
    if (layer.batch_norm) total += 2LL * layer.out_channels;
    return total;
}

long long param_count(const ArchDescriptor& d) {
    const auto violations = validate(d);
    if (!violations.empty()) {
        raise(ErrorKind::validation,
              "param_count: invalid descriptor (" + violations.front().rule + ": " +
                  violations.front().message + ")");
    }
    long long total = 0;
    for (const auto& layer : d.layers) total += layer_param_count(layer);
    return total;
}

namespace {

json layer_to_json(const LayerSpec& layer) {
    json j = {{"index", layer.index},
              {"op", to_string(layer.op)},
              {"kernel", layer.kernel},
              {"in_channels", layer.in_channels},
              {"out_channels", layer.out_channels},
              {"batch_norm", layer.batch_norm},
              {"activation", to_string(layer.activation)},
              {"dropout", layer.dropout},
              {"branch", to_string(layer.branch)}};
    if (layer.meta_layer > 0) j["meta_layer"] = layer.meta_layer;
    return j;
}

LayerSpec layer_from_json(const json& j) {
    LayerSpec layer;
    layer.index = j.at("index").get<int>();
    layer.op = enum_from_string<LayerOp>(j.at("op").get<std::string>(),
                                         {{"conv3d", LayerOp::conv3d},
                                          {"conv2d", LayerOp::conv2d},
                                          {"tsm-conv2d", LayerOp::tsm_conv2d},
                                          {"attention-mix", LayerOp::attention_mix}},
                                         "layer op");
    layer.kernel = j.at("kernel").get<std::vector<int>>();
    layer.in_channels = j.at("in_channels").get<int>();
    layer.out_channels = j.at("out_channels").get<int>();
    layer.batch_norm = j.at("batch_norm").get<bool>();
    layer.activation = enum_from_string<ActivationKind>(j.at("activation").get<std::string>(),
                                                        {{"none", ActivationKind::none},
                                                         {"relu", ActivationKind::relu},
                                                         {"tanh", ActivationKind::tanh},
                                                         {"sigmoid", ActivationKind::sigmoid}},
                                                        "activation");
    layer.dropout = j.at("dropout").get<double>();
    layer.branch = enum_from_string<BranchTag>(j.at("branch").get<std::string>(),
                                               {{"trunk", BranchTag::trunk},
                                                {"diff", BranchTag::diff},
                                                {"raw", BranchTag::raw},
                                                {"mix", BranchTag::mix}},
                                               "branch");
    if (j.contains("meta_layer")) layer.meta_layer = j.at("meta_layer").get<int>();
    return layer;
}

}  // namespace

void emit_descriptor(const ArchDescriptor& d, const std::filesystem::path& path) {
    const auto violations = validate(d);
    if (!violations.empty()) {
        raise(ErrorKind::validation, "emit: invalid descriptor (" + violations.front().rule +
                                         ": " + violations.front().message + ")");
    }

    json layers = json::array();
    for (const auto& layer : d.layers) layers.push_back(layer_to_json(layer));
    json pooling = json::array();
    for (const auto& pool : d.pooling) {
        pooling.push_back(
            {{"index", pool.index}, {"stride", pool.stride}, {"kind", to_string(pool.kind)}});
    }
    const json doc = {{"family", to_string(d.family)},
                      {"depth", d.depth},
                      {"input", {{"spatial", d.input_spatial}, {"frames", d.input_frames}}},
                      {"layers", layers},
                      {"pooling", pooling}};

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::io, "cannot write " + path.string());
    out << doc.dump(2) << "\n";
    if (!out) raise(ErrorKind::io, "write failed for " + path.string());
}

ArchDescriptor parse_descriptor(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::io, "cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        raise(ErrorKind::format, path.string() + ": " + e.what());
    }

    ArchDescriptor d;
    try {
        d.family = enum_from_string<ModelFamily>(
            doc.at("family").get<std::string>(),
            {{"physnet3dcnn", ModelFamily::physnet3dcnn}, {"tscan", ModelFamily::tscan}},
            "family");
        d.depth = doc.at("depth").get<int>();
        d.input_spatial = doc.at("input").at("spatial").get<int>();
        d.input_frames = doc.at("input").at("frames").get<int>();
        for (const auto& layer : doc.at("layers")) d.layers.push_back(layer_from_json(layer));
        for (const auto& pool : doc.at("pooling")) {
            PoolingSpec spec;
            spec.index = pool.at("index").get<int>();
            spec.stride = pool.at("stride").get<int>();
            spec.kind = enum_from_string<PoolKind>(
                pool.at("kind").get<std::string>(),
                {{"max", PoolKind::max}, {"avg", PoolKind::avg}}, "pooling kind");
            d.pooling.push_back(spec);
        }
    } catch (const json::exception& e) {
        raise(ErrorKind::format, path.string() + ": " + e.what());
    }
    return d;
}

}  // namespace repsim
