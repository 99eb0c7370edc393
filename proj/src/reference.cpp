#include "specnet/reference.hpp"

namespace specnet::reference {

Tensor2 conv_forward(const Tensor2& x, const ConvSpec& spec, const LayerWeights& w)
{
    spec.validate();
    w.validate(spec);
    if (spec.transposed || x.channels() != spec.in_channels) throw ShapeError("reference::conv_forward: bad input");
    const std::size_t n_out = conv_output_length(x.length(), spec);
    Tensor2 y(spec.out_channels, n_out);
    for (std::size_t ko = 0; ko < spec.out_channels; ++ko) {
        const std::size_t k0 = spec.group_first_input(ko);
        for (std::size_t j = 0; j < n_out; ++j) {
            double acc = 0.0;
            for (std::size_t kl = 0; kl < spec.in_per_group(); ++kl) {
                for (std::size_t i = 0; i < spec.kernel_size; ++i) {
                    acc += w.weight[spec.weight_index(ko, kl, i)] *
                           x(k0 + kl, j * spec.stride + i * spec.dilation);
                }
            }
            if (w.bias) acc += (*w.bias)[ko];
            y(ko, j) = spec.activation(acc);
        }
    }
    return y;
}

Tensor2 conv_transpose_forward(const Tensor2& x, const ConvSpec& spec, const LayerWeights& w)
{
    spec.validate();
    w.validate(spec);
    if (!spec.transposed || x.channels() != spec.in_channels) {
        throw ShapeError("reference::conv_transpose_forward: bad input");
    }
    const std::size_t n_in = x.length();
    const std::size_t n_out = conv_output_length(n_in, spec);
    Tensor2 y(spec.out_channels, n_out);
    for (std::size_t ko = 0; ko < spec.out_channels; ++ko) {
        const std::size_t k0 = spec.group_first_input(ko);
        for (std::size_t j = 0; j < n_out; ++j) {
            double acc = 0.0;
            for (std::size_t kl = 0; kl < spec.in_per_group(); ++kl) {
                for (std::size_t i = 0; i < spec.kernel_size; ++i) {
                    const std::size_t off = i * spec.dilation;
                    if (j < off || (j - off) % spec.stride != 0) continue;
                    const std::size_t p = (j - off) / spec.stride;
                    if (p >= n_in) continue;
                    acc += w.weight[spec.weight_index(ko, kl, i)] * x(k0 + kl, p);
                }
            }
            if (w.bias) acc += (*w.bias)[ko];
            y(ko, j) = spec.activation(acc);
        }
    }
    return y;
}

Matrix conv_matrix(const ConvSpec& spec, const LayerWeights& w, std::size_t n)
{
    spec.validate();
    w.validate(spec);
    if (spec.transposed) throw ShapeError("reference::conv_matrix: expects a forward convolution");
    const std::size_t n_out = conv_output_length(n, spec);
    Matrix m(spec.out_channels * n_out, spec.in_channels * n);
    for (std::size_t ko = 0; ko < spec.out_channels; ++ko) {
        const std::size_t k0 = spec.group_first_input(ko);
        for (std::size_t j = 0; j < n_out; ++j) {
            for (std::size_t kl = 0; kl < spec.in_per_group(); ++kl) {
                for (std::size_t i = 0; i < spec.kernel_size; ++i) {
                    const std::size_t col = (k0 + kl) * n + j * spec.stride + i * spec.dilation;
                    m(ko * n_out + j, col) += w.weight[spec.weight_index(ko, kl, i)];
                }
            }
        }
    }
    return m;
}

std::vector<double> dense_forward(std::span<const double> x, const Matrix& w, std::span<const double> b,
                                  const Activation& act)
{
    if (x.size() != w.cols || (!b.empty() && b.size() != w.rows)) {
        throw ShapeError("reference::dense_forward: dimension mismatch");
    }
    std::vector<double> y(w.rows);
    for (std::size_t i = 0; i < w.rows; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < w.cols; ++j) acc += w(i, j) * x[j];
        if (!b.empty()) acc += b[i];
        y[i] = act(acc);
    }
    return y;
}

} // namespace specnet::reference
