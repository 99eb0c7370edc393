#pragma once

// Complex numbers inside real-valued networks: z -> [Re z, Im z, Re z, Im z]
// along the channel axis, so C^n becomes a 4 x n tensor.

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "specnet/tensor.hpp"

namespace specnet {

using cplx = std::complex<double>;
using ComplexVec = std::vector<cplx>;

Tensor2 embed(std::span<const cplx> z);

/// Inverse of embed. Rows 2 and 3 must repeat rows 0 and 1 within `tol`.
ComplexVec extract(const Tensor2& x, double tol = 1e-12);

using Block2 = std::array<std::array<double, 2>, 2>;

/// [[Re z, Im z], [-Im z, Re z]]. Row r holds the taps that input component r
/// (0 = real, 1 = imaginary) contributes to the two interleaved output slots,
/// so (Re zw, Im zw) = B^T (Re w, Im w).
Block2 complex_block(cplx z);
cplx apply_block(const Block2& b, cplx w);
Block2 multiply(const Block2& a, const Block2& b);

/// e^{2 pi i turns}, exact at multiples of a quarter turn.
cplx cis_turns(double turns);

} // namespace specnet
