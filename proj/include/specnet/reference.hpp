#pragma once

// Serial, loop-per-index reference kernels. They mirror the textbook definitions
// term by term and exist to check the OpenMP kernels in conv.cpp; nothing in the
// library calls them on a hot path.

#include "specnet/conv.hpp"

namespace specnet::reference {

/// Quadruple loop (out channel, position, in channel, tap). Sums in the same
/// (in channel, tap) order as the optimized kernel, so results agree bit for bit.
Tensor2 conv_forward(const Tensor2& x, const ConvSpec& spec, const LayerWeights& w);

/// Gather formulation: for each output position j, sums over (in channel, tap)
/// the unique input position p with p*t + i*d == j, if any.
Tensor2 conv_transpose_forward(const Tensor2& x, const ConvSpec& spec, const LayerWeights& w);

/// Dense matrix M of the (non-transposed) convolution acting on flattened inputs,
/// shape (m' * n_out) x (m * n).
Matrix conv_matrix(const ConvSpec& spec, const LayerWeights& w, std::size_t n);

std::vector<double> dense_forward(std::span<const double> x, const Matrix& w, std::span<const double> b,
                                  const Activation& act);

} // namespace specnet::reference
