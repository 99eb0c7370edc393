#include "specnet/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace specnet {

DyadicGrid::DyadicGrid(int level) : level_(level)
{
    if (level < 1 || level > 30) throw std::invalid_argument("DyadicGrid: level must be in [1, 30]");
    step_ = std::ldexp(1.0, -level);
    nodes_ = (std::size_t{1} << level) + 1;
}

std::vector<double> DyadicGrid::points() const
{
    std::vector<double> x(nodes_);
    for (std::size_t j = 0; j < nodes_; ++j) x[j] = node(j);
    return x;
}

const char* to_string(SpectralKind k)
{
    switch (k) {
    case SpectralKind::phi_z: return "phi_z";
    case SpectralKind::F_omega: return "F_omega";
    case SpectralKind::S_m: return "S_m";
    case SpectralKind::Psi: return "Psi";
    }
    return "?";
}

namespace {

void check_level(int k)
{
    if (k < 1 || k > 20) throw std::invalid_argument("spectral builders: level k must be in [1, 20]");
}

// Appends phi^j for B stacked copies, copy q using multiplier zs[q]. The graph
// output must be (4B) x 2^{j-1}; afterwards it is (4B) x 2^j.
void append_phi_stage(NetworkGraph& g, int j, std::span<const cplx> zs)
{
    const std::size_t B = zs.size();
    const std::size_t n = std::size_t{1} << (j - 1);

    // f1: transposed conv, stride 2, identity block and 2x2 block of z per copy.
    ConvSpec s1{4 * B, 4 * B, B, 2, 2, 1, true};
    LayerWeights w1{std::vector<double>(s1.weight_count(), 0.0), std::nullopt};
    for (std::size_t q = 0; q < B; ++q) {
        const Block2 zb = complex_block(zs[q]);
        const double rows[4][2] = {{1.0, 0.0}, {0.0, 1.0}, {zb[0][0], zb[0][1]}, {zb[1][0], zb[1][1]}};
        for (std::size_t c = 0; c < 4; ++c) {
            for (std::size_t i = 0; i < 2; ++i) w1.weight[s1.weight_index(4 * q + c, c, i)] = rows[c][i];
        }
    }
    g.push(ConvLayer{s1, std::move(w1)});

    // f2: 1x1 conv summing channel pairs (0,1) and (2,3).
    ConvSpec s2{4 * B, 2 * B, B, 1, 1, 1};
    LayerWeights w2{std::vector<double>(s2.weight_count(), 0.0), std::nullopt};
    for (std::size_t q = 0; q < B; ++q) {
        w2.weight[s2.weight_index(2 * q, 0, 0)] = 1.0;
        w2.weight[s2.weight_index(2 * q, 1, 0)] = 1.0;
        w2.weight[s2.weight_index(2 * q + 1, 2, 0)] = 1.0;
        w2.weight[s2.weight_index(2 * q + 1, 3, 0)] = 1.0;
    }
    g.push(ConvLayer{s2, std::move(w2)});

    // R1: flatten each copy.
    g.push(ReshapeLayer{B, 4 * n});

    // f3: stride-2 conv splitting (Re, Im) pairs back into the 4-channel layout.
    ConvSpec s3{B, 4 * B, B, 2, 2, 1};
    LayerWeights w3{std::vector<double>(s3.weight_count(), 0.0), std::nullopt};
    for (std::size_t q = 0; q < B; ++q) {
        for (std::size_t c = 0; c < 4; ++c) w3.weight[s3.weight_index(4 * q + c, 0, c % 2)] = 1.0;
    }
    g.push(ConvLayer{s3, std::move(w3)});

    // f4: dilation n pairs w_i with z w_i, which sit n positions apart.
    ConvSpec s4{4 * B, 8 * B, B, 2, 1, n};
    LayerWeights w4{std::vector<double>(s4.weight_count(), 0.0), std::nullopt};
    for (std::size_t q = 0; q < B; ++q) {
        for (std::size_t c = 0; c < 4; ++c) {
            for (std::size_t i = 0; i < 2; ++i) w4.weight[s4.weight_index(8 * q + c + 4 * i, c, i)] = 1.0;
        }
    }
    g.push(ConvLayer{s4, std::move(w4)});

    // R2: per copy, 8 x n -> n x 8 -> 2n x 4 (row-wise) -> 4 x 2n.
    g.push(TransposeLayer{B});
    g.push(ReshapeLayer{B * 2 * n, 4});
    g.push(TransposeLayer{B});
}

// Multipliers of stage j for a mode advancing `turns` per grid step: z^{2^{j-1}}.
cplx stage_multiplier(double turns_per_step, int j)
{
    return cis_turns(std::ldexp(turns_per_step, j - 1));
}

std::vector<std::size_t> inverse_permutation_source(int k)
{
    const auto exponent = derive_permutation(k);
    std::vector<std::size_t> source(exponent.size());
    for (std::size_t p = 0; p < exponent.size(); ++p) source[exponent[p]] = p;
    return source;
}

} // namespace

SpectralNet build_phi_z(int k, cplx z)
{
    check_level(k);
    NetworkGraph g(Shape{4, std::size_t{1} << (k - 1)});
    const cplx zs[1] = {z};
    append_phi_stage(g, k, zs);
    return {std::move(g), k, 0, SpectralKind::phi_z};
}

std::vector<std::size_t> derive_permutation(int k)
{
    check_level(k);
    const std::size_t n = std::size_t{1} << k;
    std::vector<std::size_t> exponent(n, 0);
    const cplx one[1] = {1.0};
    const Tensor2 input = embed(one);
    for (int bit = 0; bit < k; ++bit) {
        NetworkGraph g(Shape{4, 1});
        for (int j = 1; j <= k; ++j) {
            const cplx zs[1] = {j - 1 == bit ? cplx{-1.0, 0.0} : cplx{1.0, 0.0}};
            append_phi_stage(g, j, zs);
        }
        const ComplexVec out = extract(network_forward(g, input));
        for (std::size_t p = 0; p < n; ++p) {
            if (out[p] == cplx{-1.0, 0.0}) {
                exponent[p] |= std::size_t{1} << bit;
            } else if (out[p] != cplx{1.0, 0.0}) {
                throw std::logic_error("derive_permutation: composition does not move entries as expected");
            }
        }
    }
    std::vector<bool> seen(n, false);
    for (auto e : exponent) {
        if (seen[e]) throw std::logic_error("derive_permutation: traced map is not a permutation");
        seen[e] = true;
    }
    return exponent;
}

SpectralNet build_F_turns(int k, double turns_per_step)
{
    check_level(k);
    NetworkGraph g(Shape{4, 1});
    for (int j = 1; j <= k; ++j) {
        const cplx zs[1] = {stage_multiplier(turns_per_step, j)};
        append_phi_stage(g, j, zs);
    }
    g.push(PermuteLayer{inverse_permutation_source(k)});
    return {std::move(g), k, 0, SpectralKind::F_omega};
}

SpectralNet build_F_omega(int k, double omega)
{
    check_level(k);
    return build_F_turns(k, omega * std::ldexp(1.0, -k) / (2.0 * std::numbers::pi));
}

SpectralNet build_S_m(int k, int m)
{
    check_level(k);
    if (m < 1) throw std::invalid_argument("build_S_m: m must be >= 1");
    const auto B = static_cast<std::size_t>(2 * m + 1);
    NetworkGraph g(Shape{4, B});
    // Embedded coefficients (4 x B) -> one 4-channel, length-1 block per mode.
    g.push(TransposeLayer{1});
    g.push(ReshapeLayer{4 * B, 1});

    std::vector<cplx> zs(B);
    const double h = std::ldexp(1.0, -k);
    for (int j = 1; j <= k; ++j) {
        for (std::size_t q = 0; q < B; ++q) {
            const double freq = static_cast<double>(q) - m;
            zs[q] = stage_multiplier(freq * h, j);
        }
        append_phi_stage(g, j, zs);
    }
    g.push(PermuteLayer{inverse_permutation_source(k)});

    // L: sum the B mode blocks component-wise.
    ConvSpec sl{4 * B, 4, 1, 1, 1, 1};
    LayerWeights wl{std::vector<double>(sl.weight_count(), 0.0), std::nullopt};
    for (std::size_t q = 0; q < B; ++q) {
        for (std::size_t c = 0; c < 4; ++c) wl.weight[sl.weight_index(c, 4 * q + c, 0)] = 1.0;
    }
    g.push(ConvLayer{sl, std::move(wl)});

    // A: periodicity, x_{N_h} = 1 repeats x_1 = 0.
    g.push(AppendLayer{{0}});
    return {std::move(g), k, m, SpectralKind::S_m};
}

SpectralNet build_Psi(int k, int m)
{
    check_level(k);
    SpectralNet fine = build_S_m(k + 1, m);
    const std::size_t nh = (std::size_t{1} << k) + 1;
    fine.graph.push(TruncateLayer{nh - 1, 2 * nh - 1});
    fine.graph.push(SelectChannelsLayer{{0}});
    return {std::move(fine.graph), k, m, SpectralKind::Psi};
}

NetworkGraph real_to_embedded(std::size_t n)
{
    NetworkGraph g(Shape{1, 2 * n});
    g.push(ReshapeLayer{n, 2});
    g.push(TransposeLayer{1});
    g.push(SelectChannelsLayer{{0, 1, 0, 1}});
    return g;
}

NetworkGraph build_Psi_real(int k, int m)
{
    NetworkGraph g = real_to_embedded(static_cast<std::size_t>(2 * m + 1));
    g.append(build_Psi(k, m).graph);
    return g;
}

} // namespace specnet
