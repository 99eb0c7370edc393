#include "specnet/complex_embed.hpp"

#include <cmath>
#include <numbers>

namespace specnet {

Tensor2 embed(std::span<const cplx> z)
{
    Tensor2 x(4, z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
        x(0, j) = x(2, j) = z[j].real();
        x(1, j) = x(3, j) = z[j].imag();
    }
    return x;
}

ComplexVec extract(const Tensor2& x, double tol)
{
    if (x.channels() != 4) throw ShapeError("extract: expected 4 channels, got " + to_string(x.shape()));
    ComplexVec z(x.length());
    for (std::size_t j = 0; j < x.length(); ++j) {
        if (std::abs(x(0, j) - x(2, j)) > tol || std::abs(x(1, j) - x(3, j)) > tol) {
            throw ShapeError("extract: duplicated rows disagree at position " + std::to_string(j));
        }
        z[j] = {x(0, j), x(1, j)};
    }
    return z;
}

Block2 complex_block(cplx z)
{
    return {{{z.real(), z.imag()}, {-z.imag(), z.real()}}};
}

cplx apply_block(const Block2& b, cplx w)
{
    return {b[0][0] * w.real() + b[1][0] * w.imag(), b[0][1] * w.real() + b[1][1] * w.imag()};
}

Block2 multiply(const Block2& a, const Block2& b)
{
    Block2 c{};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
    }
    return c;
}

cplx cis_turns(double turns)
{
    double r = turns - std::floor(turns);
    const double q = 4.0 * r;
    if (q == std::floor(q)) {
        switch (static_cast<int>(q)) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        case 3: return {0.0, -1.0};
        default: break;
        }
    }
    const double a = 2.0 * std::numbers::pi * r;
    return {std::cos(a), std::sin(a)};
}

} // namespace specnet
