#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "specnet/conv.hpp"
#include "specnet/tensor.hpp"

namespace specnet {

struct ConvLayer {
    ConvSpec spec;
    LayerWeights weights;
};

/// Acts on the flattened input; produces a 1 x rows tensor.
struct DenseLayer {
    Matrix weight;
    std::optional<std::vector<double>> bias;
    Activation activation{};
};

/// Same row-major storage viewed as channels x length.
struct ReshapeLayer {
    std::size_t channels = 0;
    std::size_t length = 0;
};

/// Splits the channels into `batch` equal blocks and transposes each block:
/// (batch*c) x L -> (batch*L) x c.
struct TransposeLayer {
    std::size_t batch = 1;
};

/// C x L -> 1 x (C*L).
struct FlattenLayer {};

/// Keeps positions [begin, end) along the length axis of every channel.
struct TruncateLayer {
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Appends copies of the listed positions at the end of every channel.
struct AppendLayer {
    std::vector<std::size_t> positions;
};

/// out[:, j] = in[:, source[j]]; a gather along the length axis.
struct PermuteLayer {
    std::vector<std::size_t> source;
};

/// out[c, :] = in[channels[c], :].
struct SelectChannelsLayer {
    std::vector<std::size_t> channels;
};

using Layer = std::variant<ConvLayer, DenseLayer, ReshapeLayer, TransposeLayer, FlattenLayer, TruncateLayer,
                           AppendLayer, PermuteLayer, SelectChannelsLayer>;

/// True for layers that only move data (no arithmetic).
bool is_data_movement(const Layer& layer);
bool is_linear(const Layer& layer);
std::string layer_name(const Layer& layer);

/// Output shape of `layer` applied to `in`; throws ShapeError when incompatible.
Shape infer_shape(const Layer& layer, const Shape& in);

/// Ordered pipeline of layers with a fixed input shape. Every push() is shape
/// checked, so a constructed graph is always consistent.
class NetworkGraph {
public:
    NetworkGraph() = default;
    explicit NetworkGraph(Shape input) : input_(input), output_(input) {}

    NetworkGraph& push(Layer layer);
    /// Appends all layers of `tail`, whose input shape must equal our output shape.
    NetworkGraph& append(const NetworkGraph& tail);

    const Shape& input_shape() const { return input_; }
    const Shape& output_shape() const { return output_; }
    const std::vector<Layer>& layers() const { return layers_; }
    bool empty() const { return layers_.empty(); }
    std::size_t size() const { return layers_.size(); }

    bool is_linear() const;
    /// Arithmetic layers plus maximal runs of consecutive data-movement layers
    /// (a run such as transpose-reshape-transpose counts as one reshaping layer).
    std::size_t depth() const;
    std::size_t conv_layer_count() const;
    /// Largest channel count seen at the input or output of any conv layer.
    std::size_t max_conv_channels() const;
    std::size_t max_kernel_size() const;

private:
    Shape input_;
    Shape output_;
    std::vector<Layer> layers_;
};

NetworkGraph concat(const NetworkGraph& head, const NetworkGraph& tail);

Tensor2 apply_layer(const Layer& layer, Tensor2 x);
Tensor2 network_forward(const NetworkGraph& net, Tensor2 x);

/// Stored weight and bias entries that are nonzero. Grouped kernels are stored
/// once (m'*(m/g)*s entries) and data-movement layers contribute nothing.
std::size_t count_active_weights(const NetworkGraph& net);

/// Matrix V with V e_i = network_forward(net, e_i) over the flattened input of
/// size in_dim. Throws if any layer is nonlinear.
Matrix materialize_linear_map(const NetworkGraph& net, std::size_t in_dim);

/// Flat key=value serialization (the same text format as run manifests).
void write_graph(std::ostream& os, const NetworkGraph& net, const std::string& prefix = "graph");
NetworkGraph read_graph(std::istream& is, const std::string& prefix = "graph");

} // namespace specnet
