#pragma once

// 1D convolution, transposed convolution and dense layers.
//
// Indexing follows the usual deep-learning conventions (0-based here):
//   conv:        y[k'][j] = rho( sum_{k in grp(k')} sum_i W[k'][k-k0][i] * x[k][j*t + i*d] + b[k'] )
//   transposed:  the adjoint of the strided/dilated cross-correlation, i.e.
//                y[k'][p*t + i*d] += W[k-k0][k'][i] * x[k][p]
// where grp(k') is the block of m/g input channels that feeds output channel k'.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specnet/tensor.hpp"

namespace specnet {

enum class ActivationKind { identity, relu, leaky_relu };

struct Activation {
    ActivationKind kind = ActivationKind::identity;
    double slope = 0.01; // leaky_relu only

    static Activation identity() { return {}; }
    static Activation relu() { return {ActivationKind::relu, 0.0}; }
    static Activation leaky_relu(double slope = 0.01) { return {ActivationKind::leaky_relu, slope}; }

    double operator()(double v) const
    {
        switch (kind) {
        case ActivationKind::relu: return v > 0.0 ? v : 0.0;
        case ActivationKind::leaky_relu: return v >= 0.0 ? v : slope * v;
        case ActivationKind::identity: break;
        }
        return v;
    }
    /// Derivative; the value at 0 is the positive-side slope.
    double derivative(double v) const
    {
        switch (kind) {
        case ActivationKind::relu: return v >= 0.0 ? 1.0 : 0.0;
        case ActivationKind::leaky_relu: return v >= 0.0 ? 1.0 : slope;
        case ActivationKind::identity: break;
        }
        return 1.0;
    }
    bool is_linear() const { return kind == ActivationKind::identity; }
    friend bool operator==(const Activation&, const Activation&) = default;
};

std::string to_string(const Activation& a);

struct ConvSpec {
    std::size_t in_channels = 1;
    std::size_t out_channels = 1;
    std::size_t groups = 1;
    std::size_t kernel_size = 1;
    std::size_t stride = 1;
    std::size_t dilation = 1;
    bool transposed = false;
    Activation activation{};

    /// Throws ShapeError unless g divides both channel counts and s, t, d >= 1.
    void validate() const;

    std::size_t in_per_group() const { return in_channels / groups; }
    std::size_t out_per_group() const { return out_channels / groups; }
    /// m'*(m/g)*s for both orientations.
    std::size_t weight_count() const { return out_channels * in_per_group() * kernel_size; }

    /// Flat index of W[k'][kl][i] (conv) or W[kl][k'][i] (transposed).
    std::size_t weight_index(std::size_t out_ch, std::size_t in_local, std::size_t tap) const
    {
        return transposed ? (in_local * out_channels + out_ch) * kernel_size + tap
                          : (out_ch * in_per_group() + in_local) * kernel_size + tap;
    }
    /// First input channel of the group feeding `out_ch`.
    std::size_t group_first_input(std::size_t out_ch) const
    {
        return (out_ch / out_per_group()) * in_per_group();
    }
};

struct LayerWeights {
    std::vector<double> weight;
    /// Per-output-channel bias; nullopt means "no bias" and is not counted as weights.
    std::optional<std::vector<double>> bias;

    void validate(const ConvSpec& spec) const;
};

/// floor((n - d(s-1) - 1)/t) + 1 for conv, (n-1)t + d(s-1) + 1 for transposed.
std::size_t conv_output_length(std::size_t n, const ConvSpec& spec);

Tensor2 conv_forward(const Tensor2& x, const ConvSpec& spec, const LayerWeights& w);
Tensor2 conv_transpose_forward(const Tensor2& x, const ConvSpec& spec, const LayerWeights& w);

/// Dispatches on spec.transposed.
Tensor2 apply_conv(const Tensor2& x, const ConvSpec& spec, const LayerWeights& w);

/// rho(W x + b); an empty bias means zero.
std::vector<double> dense_forward(std::span<const double> x, const Matrix& w, std::span<const double> b,
                                  const Activation& act);

} // namespace specnet
