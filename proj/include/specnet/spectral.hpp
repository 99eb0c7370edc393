#pragma once

// Exact-weight linear CNNs that synthesize truncated Fourier series on dyadic grids.
//
//   phi_z^k : C^{2^{k-1}} -> C^{2^k},  [w_1, ..., w_n] -> [w_1, z w_1, ..., w_n, z w_n]
//   F_omega : C -> C^{2^k},            w -> [w e^{i omega x_j}]_{j=1..2^k}
//   S_m     : C^{2m+1} -> C^{N_h},     Z -> [sum_q z_q e^{2 pi i q x_j}]_j
//   Psi     : C^{2m+1} -> R^{N_h},     real part of S_m on the twice finer grid, second half
//
// Complex vectors travel through the graphs in the embedded 4 x n layout of
// complex_embed.hpp. Nothing here is trained.

#include <complex>
#include <vector>

#include "specnet/complex_embed.hpp"
#include "specnet/network.hpp"

namespace specnet {

/// Nodes x_j = j h, j = 0..2^k, h = 2^-k.
class DyadicGrid {
public:
    explicit DyadicGrid(int level);

    int level() const { return level_; }
    double step() const { return step_; }
    std::size_t nodes() const { return nodes_; }
    double node(std::size_t j) const { return static_cast<double>(j) * step_; }
    std::vector<double> points() const;

private:
    int level_;
    double step_;
    std::size_t nodes_;
};

enum class SpectralKind { phi_z, F_omega, S_m, Psi };
const char* to_string(SpectralKind k);

struct SpectralNet {
    NetworkGraph graph;
    int level = 0;
    int modes = 0; // m for S_m / Psi, 0 otherwise
    SpectralKind kind = SpectralKind::phi_z;
};

SpectralNet build_phi_z(int k, cplx z);

/// exponent[p] such that phi^k_{z^{2^{k-1}}} o ... o phi^1_z sends w to an output
/// whose entry p equals w z^{exponent[p]}. Obtained by running the composed
/// network on sign-tagged inputs, one bit of the exponent per pass.
std::vector<std::size_t> derive_permutation(int k);

SpectralNet build_F_omega(int k, double omega);
/// Same network with the frequency given in turns per grid step (omega h / 2 pi).
SpectralNet build_F_turns(int k, double turns_per_step);

SpectralNet build_S_m(int k, int m);
SpectralNet build_Psi(int k, int m);

/// Gather that turns a real vector [Re z_0, Im z_0, Re z_1, ...] of length
/// 2n into the embedded 4 x n layout (input of S_m / Psi).
NetworkGraph real_to_embedded(std::size_t n);

/// Psi preceded by real_to_embedded: R^{4m+2} -> R^{N_h}.
NetworkGraph build_Psi_real(int k, int m);

} // namespace specnet
