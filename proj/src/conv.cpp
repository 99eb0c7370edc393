#include "specnet/conv.hpp"

#include <cstdint>

namespace specnet {

namespace {

// Below this many multiply-adds a layer runs single-threaded.
constexpr std::size_t kParallelWork = 1 << 14;

void check_input(const Tensor2& x, const ConvSpec& spec, const LayerWeights& w)
{
    spec.validate();
    w.validate(spec);
    if (x.channels() != spec.in_channels) {
        throw ShapeError("conv: input has " + std::to_string(x.channels()) + " channels, layer expects " +
                         std::to_string(spec.in_channels));
    }
}

void finish_row(std::span<double> row, const ConvSpec& spec, const LayerWeights& w, std::size_t out_ch)
{
    if (w.bias) {
        const double b = (*w.bias)[out_ch];
        for (double& v : row) v += b;
    }
    if (!spec.activation.is_linear()) {
        for (double& v : row) v = spec.activation(v);
    }
}

} // namespace

std::string to_string(const Activation& a)
{
    switch (a.kind) {
    case ActivationKind::relu: return "relu";
    case ActivationKind::leaky_relu: return "leaky_relu(" + std::to_string(a.slope) + ")";
    case ActivationKind::identity: break;
    }
    return "identity";
}

void ConvSpec::validate() const
{
    if (in_channels == 0 || out_channels == 0) throw ShapeError("ConvSpec: channel counts must be positive");
    if (groups == 0 || in_channels % groups != 0 || out_channels % groups != 0) {
        throw ShapeError("ConvSpec: groups=" + std::to_string(groups) + " must divide in_channels=" +
                         std::to_string(in_channels) + " and out_channels=" + std::to_string(out_channels));
    }
    if (kernel_size == 0 || stride == 0 || dilation == 0) {
        throw ShapeError("ConvSpec: kernel size, stride and dilation must be >= 1");
    }
}

void LayerWeights::validate(const ConvSpec& spec) const
{
    if (weight.size() != spec.weight_count()) {
        throw ShapeError("LayerWeights: expected " + std::to_string(spec.weight_count()) + " weights, got " +
                         std::to_string(weight.size()));
    }
    if (bias && bias->size() != spec.out_channels) {
        throw ShapeError("LayerWeights: bias must have one entry per output channel");
    }
}

std::size_t conv_output_length(std::size_t n, const ConvSpec& spec)
{
    spec.validate();
    const std::size_t span = spec.dilation * (spec.kernel_size - 1);
    if (spec.transposed) {
        if (n == 0) throw ShapeError("conv_output_length: empty input");
        return (n - 1) * spec.stride + span + 1;
    }
    if (n < span + 1) {
        throw ShapeError("conv_output_length: input length " + std::to_string(n) +
                         " is shorter than the dilated kernel span " + std::to_string(span + 1));
    }
    return (n - span - 1) / spec.stride + 1;
}

Tensor2 conv_forward(const Tensor2& x, const ConvSpec& spec, const LayerWeights& w)
{
    if (spec.transposed) throw ShapeError("conv_forward: spec is transposed");
    check_input(x, spec, w);
    const std::size_t n_out = conv_output_length(x.length(), spec);
    const std::size_t ipg = spec.in_per_group();
    const std::size_t s = spec.kernel_size;
    const std::size_t t = spec.stride;
    const std::size_t d = spec.dilation;
    Tensor2 y(spec.out_channels, n_out);

    const auto n_rows = static_cast<std::int64_t>(spec.out_channels);
    const bool par = spec.out_channels * ipg * s * n_out > kParallelWork;
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t ko = 0; ko < n_rows; ++ko) {
        const auto out_ch = static_cast<std::size_t>(ko);
        double* yr = y.row(out_ch).data();
        const std::size_t k0 = spec.group_first_input(out_ch);
        for (std::size_t kl = 0; kl < ipg; ++kl) {
            const double* xr = x.row(k0 + kl).data();
            for (std::size_t i = 0; i < s; ++i) {
                const double wv = w.weight[spec.weight_index(out_ch, kl, i)];
                if (wv == 0.0) continue;
                const double* xs = xr + i * d;
                if (t == 1) {
                    for (std::size_t j = 0; j < n_out; ++j) yr[j] += wv * xs[j];
                } else {
                    for (std::size_t j = 0; j < n_out; ++j) yr[j] += wv * xs[j * t];
                }
            }
        }
        finish_row(y.row(out_ch), spec, w, out_ch);
    }
    return y;
}

Tensor2 conv_transpose_forward(const Tensor2& x, const ConvSpec& spec, const LayerWeights& w)
{
    if (!spec.transposed) throw ShapeError("conv_transpose_forward: spec is not transposed");
    check_input(x, spec, w);
    const std::size_t n_in = x.length();
    const std::size_t n_out = conv_output_length(n_in, spec);
    const std::size_t ipg = spec.in_per_group();
    const std::size_t s = spec.kernel_size;
    const std::size_t t = spec.stride;
    const std::size_t d = spec.dilation;
    Tensor2 y(spec.out_channels, n_out);

    const auto n_rows = static_cast<std::int64_t>(spec.out_channels);
    const bool par = spec.out_channels * ipg * s * n_in > kParallelWork;
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t ko = 0; ko < n_rows; ++ko) {
        const auto out_ch = static_cast<std::size_t>(ko);
        double* yr = y.row(out_ch).data();
        const std::size_t k0 = spec.group_first_input(out_ch);
        for (std::size_t kl = 0; kl < ipg; ++kl) {
            const double* xr = x.row(k0 + kl).data();
            for (std::size_t i = 0; i < s; ++i) {
                const double wv = w.weight[spec.weight_index(out_ch, kl, i)];
                if (wv == 0.0) continue;
                double* ys = yr + i * d;
                for (std::size_t p = 0; p < n_in; ++p) ys[p * t] += wv * xr[p];
            }
        }
        finish_row(y.row(out_ch), spec, w, out_ch);
    }
    return y;
}

Tensor2 apply_conv(const Tensor2& x, const ConvSpec& spec, const LayerWeights& w)
{
    return spec.transposed ? conv_transpose_forward(x, spec, w) : conv_forward(x, spec, w);
}

std::vector<double> dense_forward(std::span<const double> x, const Matrix& w, std::span<const double> b,
                                  const Activation& act)
{
    if (x.size() != w.cols) {
        throw ShapeError("dense_forward: input has " + std::to_string(x.size()) + " entries, weight has " +
                         std::to_string(w.cols) + " columns");
    }
    if (!b.empty() && b.size() != w.rows) throw ShapeError("dense_forward: bias size mismatch");
    std::vector<double> y(w.rows);
    const auto n_rows = static_cast<std::int64_t>(w.rows);
#pragma omp parallel for schedule(static) if (w.rows * w.cols > kParallelWork)
    for (std::int64_t ii = 0; ii < n_rows; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const double* r = w.data.data() + i * w.cols;
        double acc = 0.0;
        for (std::size_t j = 0; j < w.cols; ++j) acc += r[j] * x[j];
        if (!b.empty()) acc += b[i];
        y[i] = act(acc);
    }
    return y;
}

} // namespace specnet
