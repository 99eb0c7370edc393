#include "specnet/network.hpp"

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>

#include "specnet/kv.hpp"

namespace specnet {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

std::size_t count_nonzero(std::span<const double> v)
{
    return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](double x) { return x != 0.0; }));
}

} // namespace

bool is_data_movement(const Layer& layer)
{
    return !std::holds_alternative<ConvLayer>(layer) && !std::holds_alternative<DenseLayer>(layer);
}

bool is_linear(const Layer& layer)
{
    if (const auto* c = std::get_if<ConvLayer>(&layer)) return c->spec.activation.is_linear();
    if (const auto* d = std::get_if<DenseLayer>(&layer)) return d->activation.is_linear();
    return true;
}

std::string layer_name(const Layer& layer)
{
    return std::visit(overloaded{
                          [](const ConvLayer& c) { return std::string(c.spec.transposed ? "conv_transpose" : "conv"); },
                          [](const DenseLayer&) { return std::string("dense"); },
                          [](const ReshapeLayer&) { return std::string("reshape"); },
                          [](const TransposeLayer&) { return std::string("transpose"); },
                          [](const FlattenLayer&) { return std::string("flatten"); },
                          [](const TruncateLayer&) { return std::string("truncate"); },
                          [](const AppendLayer&) { return std::string("append"); },
                          [](const PermuteLayer&) { return std::string("permute"); },
                          [](const SelectChannelsLayer&) { return std::string("select_channels"); },
                      },
                      layer);
}

Shape infer_shape(const Layer& layer, const Shape& in)
{
    return std::visit(
        overloaded{
            [&](const ConvLayer& c) {
                c.spec.validate();
                c.weights.validate(c.spec);
                if (in.channels != c.spec.in_channels) {
                    throw ShapeError("conv layer expects " + std::to_string(c.spec.in_channels) +
                                     " input channels, got " + to_string(in));
                }
                return Shape{c.spec.out_channels, conv_output_length(in.length, c.spec)};
            },
            [&](const DenseLayer& d) {
                if (d.weight.cols != in.size()) {
                    throw ShapeError("dense layer expects " + std::to_string(d.weight.cols) + " inputs, got " +
                                     to_string(in));
                }
                if (d.bias && d.bias->size() != d.weight.rows) throw ShapeError("dense layer: bias size mismatch");
                return Shape{1, d.weight.rows};
            },
            [&](const ReshapeLayer& r) {
                if (r.channels * r.length != in.size()) {
                    throw ShapeError("reshape " + to_string(in) + " -> " + std::to_string(r.channels) + "x" +
                                     std::to_string(r.length) + " changes the element count");
                }
                return Shape{r.channels, r.length};
            },
            [&](const TransposeLayer& t) {
                if (t.batch == 0 || in.channels % t.batch != 0) {
                    throw ShapeError("transpose: batch " + std::to_string(t.batch) + " does not divide " +
                                     to_string(in));
                }
                return Shape{t.batch * in.length, in.channels / t.batch};
            },
            [&](const FlattenLayer&) { return Shape{1, in.size()}; },
            [&](const TruncateLayer& t) {
                if (t.begin >= t.end || t.end > in.length) {
                    throw ShapeError("truncate [" + std::to_string(t.begin) + "," + std::to_string(t.end) +
                                     ") out of range for " + to_string(in));
                }
                return Shape{in.channels, t.end - t.begin};
            },
            [&](const AppendLayer& a) {
                for (auto p : a.positions) {
                    if (p >= in.length) throw ShapeError("append: position out of range for " + to_string(in));
                }
                return Shape{in.channels, in.length + a.positions.size()};
            },
            [&](const PermuteLayer& p) {
                if (p.source.empty()) throw ShapeError("permute: empty index list");
                for (auto s : p.source) {
                    if (s >= in.length) throw ShapeError("permute: source index out of range for " + to_string(in));
                }
                return Shape{in.channels, p.source.size()};
            },
            [&](const SelectChannelsLayer& s) {
                if (s.channels.empty()) throw ShapeError("select_channels: empty channel list");
                for (auto c : s.channels) {
                    if (c >= in.channels) throw ShapeError("select_channels: channel out of range for " + to_string(in));
                }
                return Shape{s.channels.size(), in.length};
            },
        },
        layer);
}

NetworkGraph& NetworkGraph::push(Layer layer)
{
    output_ = infer_shape(layer, output_);
    layers_.push_back(std::move(layer));
    return *this;
}

NetworkGraph& NetworkGraph::append(const NetworkGraph& tail)
{
    if (tail.input_shape() != output_) {
        throw ShapeError("append: tail expects " + to_string(tail.input_shape()) + ", head produces " +
                         to_string(output_));
    }
    for (const auto& l : tail.layers()) push(l);
    return *this;
}

NetworkGraph concat(const NetworkGraph& head, const NetworkGraph& tail)
{
    NetworkGraph out = head;
    out.append(tail);
    return out;
}

bool NetworkGraph::is_linear() const
{
    return std::all_of(layers_.begin(), layers_.end(), [](const Layer& l) { return specnet::is_linear(l); });
}

std::size_t NetworkGraph::depth() const
{
    std::size_t d = 0;
    bool in_run = false;
    for (const auto& l : layers_) {
        if (is_data_movement(l)) {
            if (!in_run) ++d;
            in_run = true;
        } else {
            ++d;
            in_run = false;
        }
    }
    return d;
}

std::size_t NetworkGraph::conv_layer_count() const
{
    return static_cast<std::size_t>(std::count_if(layers_.begin(), layers_.end(), [](const Layer& l) {
        return std::holds_alternative<ConvLayer>(l);
    }));
}

std::size_t NetworkGraph::max_conv_channels() const
{
    std::size_t c = 0;
    for (const auto& l : layers_) {
        if (const auto* cl = std::get_if<ConvLayer>(&l)) {
            c = std::max({c, cl->spec.in_channels, cl->spec.out_channels});
        }
    }
    return c;
}

std::size_t NetworkGraph::max_kernel_size() const
{
    std::size_t s = 0;
    for (const auto& l : layers_) {
        if (const auto* cl = std::get_if<ConvLayer>(&l)) s = std::max(s, cl->spec.kernel_size);
    }
    return s;
}

Tensor2 apply_layer(const Layer& layer, Tensor2 x)
{
    const Shape out = infer_shape(layer, x.shape());
    return std::visit(
        overloaded{
            [&](const ConvLayer& c) { return apply_conv(x, c.spec, c.weights); },
            [&](const DenseLayer& d) {
                std::span<const double> b;
                if (d.bias) b = *d.bias;
                return Tensor2(1, out.length, dense_forward(x.data(), d.weight, b, d.activation));
            },
            [&](const ReshapeLayer&) {
                x.reshape(out.channels, out.length);
                return std::move(x);
            },
            [&](const FlattenLayer&) {
                x.reshape(out.channels, out.length);
                return std::move(x);
            },
            [&](const TransposeLayer& t) {
                const std::size_t rows = x.channels() / t.batch;
                const std::size_t cols = x.length();
                Tensor2 y(out.channels, out.length);
                const auto src = x.data();
                auto dst = y.data();
                for (std::size_t b = 0; b < t.batch; ++b) {
                    const std::size_t base = b * rows * cols;
                    for (std::size_t r = 0; r < rows; ++r) {
                        for (std::size_t c = 0; c < cols; ++c) dst[base + c * rows + r] = src[base + r * cols + c];
                    }
                }
                return y;
            },
            [&](const TruncateLayer& t) {
                Tensor2 y(out.channels, out.length);
                for (std::size_t c = 0; c < x.channels(); ++c) {
                    const auto r = x.row(c);
                    std::copy(r.begin() + static_cast<std::ptrdiff_t>(t.begin),
                              r.begin() + static_cast<std::ptrdiff_t>(t.end), y.row(c).begin());
                }
                return y;
            },
            [&](const AppendLayer& a) {
                Tensor2 y(out.channels, out.length);
                for (std::size_t c = 0; c < x.channels(); ++c) {
                    const auto r = x.row(c);
                    auto o = y.row(c);
                    std::copy(r.begin(), r.end(), o.begin());
                    for (std::size_t i = 0; i < a.positions.size(); ++i) o[r.size() + i] = r[a.positions[i]];
                }
                return y;
            },
            [&](const PermuteLayer& p) {
                Tensor2 y(out.channels, out.length);
                for (std::size_t c = 0; c < x.channels(); ++c) {
                    const auto r = x.row(c);
                    auto o = y.row(c);
                    for (std::size_t j = 0; j < p.source.size(); ++j) o[j] = r[p.source[j]];
                }
                return y;
            },
            [&](const SelectChannelsLayer& s) {
                Tensor2 y(out.channels, out.length);
                for (std::size_t c = 0; c < s.channels.size(); ++c) {
                    const auto r = x.row(s.channels[c]);
                    std::copy(r.begin(), r.end(), y.row(c).begin());
                }
                return y;
            },
        },
        layer);
}

Tensor2 network_forward(const NetworkGraph& net, Tensor2 x)
{
    if (x.shape() != net.input_shape()) {
        throw ShapeError("network_forward: input " + to_string(x.shape()) + " does not match graph input " +
                         to_string(net.input_shape()));
    }
    for (const auto& l : net.layers()) x = apply_layer(l, std::move(x));
    return x;
}

std::size_t count_active_weights(const NetworkGraph& net)
{
    std::size_t n = 0;
    for (const auto& l : net.layers()) {
        if (const auto* c = std::get_if<ConvLayer>(&l)) {
            n += count_nonzero(c->weights.weight);
            if (c->weights.bias) n += count_nonzero(*c->weights.bias);
        } else if (const auto* d = std::get_if<DenseLayer>(&l)) {
            n += count_nonzero(d->weight.data);
            if (d->bias) n += count_nonzero(*d->bias);
        }
    }
    return n;
}

Matrix materialize_linear_map(const NetworkGraph& net, std::size_t in_dim)
{
    if (!net.is_linear()) throw ShapeError("materialize_linear_map: graph has nonlinear activations");
    if (in_dim != net.input_shape().size()) {
        throw ShapeError("materialize_linear_map: in_dim " + std::to_string(in_dim) + " does not match graph input " +
                         to_string(net.input_shape()));
    }
    for (const auto& l : net.layers()) {
        const auto* c = std::get_if<ConvLayer>(&l);
        const auto* d = std::get_if<DenseLayer>(&l);
        if ((c && c->weights.bias) || (d && d->bias)) {
            throw ShapeError("materialize_linear_map: graph is affine, not linear (has a bias)");
        }
    }
    const std::size_t out_dim = net.output_shape().size();
    Matrix v(out_dim, in_dim);
    const auto n = static_cast<std::int64_t>(in_dim);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t ii = 0; ii < n; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        Tensor2 e(net.input_shape().channels, net.input_shape().length);
        e.data()[i] = 1.0;
        const Tensor2 y = network_forward(net, std::move(e));
        for (std::size_t r = 0; r < out_dim; ++r) v(r, i) = y.data()[r];
    }
    return v;
}

namespace {

std::string join_sizes(const std::vector<std::size_t>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    return out;
}

std::vector<std::size_t> split_sizes(std::string_view s)
{
    std::vector<std::size_t> out;
    for (const auto& p : split(s, ',')) out.push_back(static_cast<std::size_t>(parse_int(p)));
    return out;
}

const std::string& require(const KeyValues& kv, const std::string& key)
{
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError("graph: missing key '" + key + "'");
    return it->second;
}

std::string activation_field(const Activation& a)
{
    switch (a.kind) {
    case ActivationKind::relu: return "relu";
    case ActivationKind::leaky_relu: return "leaky_relu:" + format_double(a.slope);
    case ActivationKind::identity: break;
    }
    return "identity";
}

Activation parse_activation(const std::string& s)
{
    if (s == "identity") return Activation::identity();
    if (s == "relu") return Activation::relu();
    if (s.rfind("leaky_relu:", 0) == 0) return Activation::leaky_relu(parse_double(s.substr(11)));
    throw ParseError("graph: unknown activation '" + s + "'");
}

} // namespace

void write_graph(std::ostream& os, const NetworkGraph& net, const std::string& prefix)
{
    KeyValues kv;
    kv[prefix + ".input"] = std::to_string(net.input_shape().channels) + "," + std::to_string(net.input_shape().length);
    kv[prefix + ".layers"] = std::to_string(net.size());
    for (std::size_t i = 0; i < net.size(); ++i) {
        const std::string key = prefix + ".layer." + std::to_string(i) + ".";
        const Layer& l = net.layers()[i];
        kv[key + "type"] = layer_name(l);
        std::visit(overloaded{
                       [&](const ConvLayer& c) {
                           const auto& s = c.spec;
                           kv[key + "spec"] = join_sizes({s.in_channels, s.out_channels, s.groups, s.kernel_size,
                                                          s.stride, s.dilation});
                           kv[key + "activation"] = activation_field(s.activation);
                           kv[key + "weight"] = join_doubles(c.weights.weight);
                           if (c.weights.bias) kv[key + "bias"] = join_doubles(*c.weights.bias);
                       },
                       [&](const DenseLayer& d) {
                           kv[key + "spec"] = join_sizes({d.weight.rows, d.weight.cols});
                           kv[key + "activation"] = activation_field(d.activation);
                           kv[key + "weight"] = join_doubles(d.weight.data);
                           if (d.bias) kv[key + "bias"] = join_doubles(*d.bias);
                       },
                       [&](const ReshapeLayer& r) { kv[key + "spec"] = join_sizes({r.channels, r.length}); },
                       [&](const TransposeLayer& t) { kv[key + "spec"] = std::to_string(t.batch); },
                       [&](const FlattenLayer&) {},
                       [&](const TruncateLayer& t) { kv[key + "spec"] = join_sizes({t.begin, t.end}); },
                       [&](const AppendLayer& a) { kv[key + "spec"] = join_sizes(a.positions); },
                       [&](const PermuteLayer& p) { kv[key + "spec"] = join_sizes(p.source); },
                       [&](const SelectChannelsLayer& s) { kv[key + "spec"] = join_sizes(s.channels); },
                   },
                   l);
    }
    write_key_values(os, kv);
}

NetworkGraph read_graph(std::istream& is, const std::string& prefix)
{
    const KeyValues kv = read_key_values(is);
    const auto in = split_sizes(require(kv, prefix + ".input"));
    if (in.size() != 2) throw ParseError("graph: input shape needs two entries");
    NetworkGraph net(Shape{in[0], in[1]});
    const auto n = static_cast<std::size_t>(parse_int(require(kv, prefix + ".layers")));
    for (std::size_t i = 0; i < n; ++i) {
        const std::string key = prefix + ".layer." + std::to_string(i) + ".";
        const std::string& type = require(kv, key + "type");
        const auto bias_it = kv.find(key + "bias");
        std::optional<std::vector<double>> bias;
        if (bias_it != kv.end()) bias = split_doubles(bias_it->second);
        if (type == "conv" || type == "conv_transpose") {
            const auto s = split_sizes(require(kv, key + "spec"));
            if (s.size() != 6) throw ParseError("graph: conv spec needs six entries");
            ConvSpec spec{s[0], s[1], s[2], s[3], s[4], s[5], type == "conv_transpose",
                          parse_activation(require(kv, key + "activation"))};
            net.push(ConvLayer{spec, LayerWeights{split_doubles(require(kv, key + "weight")), std::move(bias)}});
        } else if (type == "dense") {
            const auto s = split_sizes(require(kv, key + "spec"));
            if (s.size() != 2) throw ParseError("graph: dense spec needs two entries");
            Matrix w(s[0], s[1]);
            w.data = split_doubles(require(kv, key + "weight"));
            if (w.data.size() != s[0] * s[1]) throw ParseError("graph: dense weight size mismatch");
            net.push(DenseLayer{std::move(w), std::move(bias), parse_activation(require(kv, key + "activation"))});
        } else if (type == "reshape") {
            const auto s = split_sizes(require(kv, key + "spec"));
            if (s.size() != 2) throw ParseError("graph: reshape spec needs two entries");
            net.push(ReshapeLayer{s[0], s[1]});
        } else if (type == "transpose") {
            net.push(TransposeLayer{static_cast<std::size_t>(parse_int(require(kv, key + "spec")))});
        } else if (type == "flatten") {
            net.push(FlattenLayer{});
        } else if (type == "truncate") {
            const auto s = split_sizes(require(kv, key + "spec"));
            if (s.size() != 2) throw ParseError("graph: truncate spec needs two entries");
            net.push(TruncateLayer{s[0], s[1]});
        } else if (type == "append") {
            net.push(AppendLayer{split_sizes(require(kv, key + "spec"))});
        } else if (type == "permute") {
            net.push(PermuteLayer{split_sizes(require(kv, key + "spec"))});
        } else if (type == "select_channels") {
            net.push(SelectChannelsLayer{split_sizes(require(kv, key + "spec"))});
        } else {
            throw ParseError("graph: unknown layer type '" + type + "'");
        }
    }
    return net;
}

} // namespace specnet
