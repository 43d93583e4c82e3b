#pragma once

#include "repsim/activation_set.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace repsim {

enum class LayerOp { conv3d, conv2d, tsm_conv2d, attention_mix };
enum class ActivationKind { none, relu, tanh, sigmoid };
enum class BranchTag { trunk, diff, raw, mix };
enum class PoolKind { max, avg };

const char* to_string(LayerOp op) noexcept;
const char* to_string(ActivationKind a) noexcept;
const char* to_string(BranchTag b) noexcept;
const char* to_string(PoolKind k) noexcept;

struct LayerSpec {
    int index = 0;  // 1-based position in the network
    LayerOp op = LayerOp::conv3d;
    std::vector<int> kernel;  // (t,h,w) for conv3d, (h,w) for 2-d ops
    int in_channels = 0;
    int out_channels = 0;
    bool batch_norm = false;
    ActivationKind activation = ActivationKind::none;
    double dropout = 0.0;  // 0 means none
    BranchTag branch = BranchTag::trunk;
    int meta_layer = 0;  // tscan grouping index; 0 for the 3DCNN trunk
};

struct PoolingSpec {
    int index = 0;  // layer index (3DCNN) or meta-layer index (tscan)
    int stride = 0;
    PoolKind kind = PoolKind::max;
};

/// Flexible-depth architecture definition for the two studied families.
/// Declarative only; nothing here runs a forward pass.
struct ArchDescriptor {
    ModelFamily family = ModelFamily::physnet3dcnn;
    int depth = 0;  // conv layers (3DCNN) or meta-layers (tscan)
    int input_spatial = 64;
    int input_frames = 0;
    std::vector<LayerSpec> layers;
    std::vector<PoolingSpec> pooling;

    /// Spatial edge length after all poolings (tscan variants can stop
    /// above 1x1; the head wiring for those is out of scope).
    int final_resolution() const;
};

/// PhysNet-3DCNN variant, depth 2..15. First conv (1,5,5)x32, intermediate
/// (5,3,3)x64, final (1,1,1)x1; pooling placement follows the family table
/// (max everywhere, avg last; spatial strides multiply to 64).
ArchDescriptor physnet3dcnn_descriptor(int depth);

/// TS-CAN variant of 1..10 meta-layers: per meta-layer two TSM-conv-tanh
/// diff steps, two conv-tanh raw steps and a sigmoid attention mix, with
/// stride-2 average pooling at the tabulated meta-layers. 64x64 input.
ArchDescriptor tscan_descriptor(int meta_depth);

struct Violation {
    std::string rule;
    std::string message;
};

/// Check every descriptor invariant; violations are data, not errors.
std::vector<Violation> validate(const ArchDescriptor& d);

/// Weights + biases of one conv layer plus 2*channels when it carries a
/// batch norm: kernel volume * in * out + out (+ 2*out).
long long layer_param_count(const LayerSpec& layer);

/// Sum of layer_param_count over the descriptor. Raises a validation
/// error when the descriptor is invalid.
long long param_count(const ArchDescriptor& d);

/// Write the descriptor as JSON. emit -> parse reproduces it exactly.
void emit_descriptor(const ArchDescriptor& d, const std::filesystem::path& path);
ArchDescriptor parse_descriptor(const std::filesystem::path& path);

}  // namespace repsim
