#pragma once

// Analysis side of the spectral decoder: boundary-correcting Hermite
// polynomials, the periodization g = T0 f, the fold f -> f~ onto the torus,
// Fourier coefficients of f~ by graded Gauss-Legendre quadrature, and
// Sobolev norms.

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "specnet/complex_embed.hpp"

namespace specnet {

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// f(x, d) returns the d-th derivative at x.
using DerivativeFn = std::function<double(double, int)>;

struct SobolevSignal {
    DerivativeFn eval;
    int smoothness = 1;
    /// Interior abscissae where some derivative of order <= smoothness jumps.
    std::vector<double> breakpoints;
    std::string name;

    double operator()(double x) const { return eval(x, 0); }
    double derivative(double x, int order) const { return eval(x, order); }
};

/// Finite-difference derivative: central stencil, forward/backward near the
/// ends of [0,1]. First derivatives use `step`; higher orders use
/// max(step, 1e-16^{1/(order+2)}) to balance truncation against rounding.
double fd_derivative(const std::function<double(double)>& f, double x, int order, double step = 1e-5);

/// Wraps a value-only function; derivatives come from fd_derivative.
SobolevSignal fd_signal(std::function<double(double)> f, int smoothness, std::vector<double> breakpoints = {},
                        std::string name = "fd");

/// Monomial coefficients, ascending.
double poly_derivative(const std::vector<double>& coeffs, double x, int order);
SobolevSignal polynomial_signal(std::vector<double> coeffs, int smoothness);

/// scale * |x - center|^exponent with analytic derivatives. At x = center the
/// right-sided value is returned; negative powers there give +inf.
SobolevSignal abs_power_signal(double center, double exponent, int smoothness, double scale = 1.0);

/// |x - 1/5|, s = 1.
SobolevSignal abs_shift_signal();
/// x^{3/2} on [0,1], s = 2.
SobolevSignal pow_3_2_signal();

SobolevSignal add(const SobolevSignal& a, const SobolevSignal& b);
SobolevSignal scale(const SobolevSignal& a, double c);

/// q_j for j = 0..s-1 with q_j^{(k)}(0) = delta_jk and q_j^{(k)}(1) = -delta_jk.
struct HermiteBasis {
    int s = 1;
    std::vector<std::vector<double>> q; // monomial coefficients, degree <= 2s-1

    double eval(int j, double x, int order) const { return poly_derivative(q[j], x, order); }
};

/// Throws std::invalid_argument for s outside [1, 8] and ConvergenceError if
/// the solve residual exceeds 1e-8.
HermiteBasis hermite_basis(int s);

/// g = f + sum_j (f^{(j)}(1) - f^{(j)}(0)) q_j, so that g^{(k)}(0) = f^{(k)}(1)
/// and g^{(k)}(1) = f^{(k)}(0) for k < s.
SobolevSignal periodize(const SobolevSignal& f, const HermiteBasis& basis);

/// f~(x) = g(2x) on [0, 1/2), f(2x - 1) on [1/2, 1].
SobolevSignal fold(const SobolevSignal& f, const HermiteBasis& basis);

struct QuadratureOptions {
    /// Number of uniform panels before splitting; 0 selects 2 * max(64, 8m).
    std::size_t panels = 0;
    /// Geometric refinement levels next to each breakpoint.
    int grading_levels = 24;
    double tol = 1e-9;
    /// Repeat with doubled panels and deeper grading, and compare.
    bool check = true;
};

struct FourierCoeffs {
    int m = 0;
    ComplexVec z; // z[q] is the coefficient of e^{2 pi i (q - m) x}
    double refinement_change = 0.0;

    cplx at(int k) const { return z[static_cast<std::size_t>(k + m)]; }
};

/// c_k = int_0^1 g(x) e^{-2 pi i k x} dx for |k| <= m, using c_{-k} = conj(c_k).
FourierCoeffs fourier_coeffs(const SobolevSignal& g, int m, const QuadratureOptions& opt = {});

/// fourier_coeffs(fold(f)).
FourierCoeffs operator_T(const SobolevSignal& f, int m, const QuadratureOptions& opt = {});

/// sum_q z_q e^{2 pi i (q - m) x} by direct summation.
cplx truncated_series_eval(const FourierCoeffs& Z, double x);

/// Nodes and weights of the composite Gauss-Legendre rule on [0,1] split at
/// the breakpoints, graded toward each breakpoint (0 and 1 included).
struct QuadratureRule {
    std::vector<double> x;
    std::vector<double> w;
};
QuadratureRule composite_rule(std::size_t panels, const std::vector<double>& breakpoints, int grading_levels);

struct NormEstimate {
    double value = 0.0;
    double refined = 0.0;
    double relative_change = 0.0;
    bool converged = false;
};

/// sqrt(sum_{k<=s} int |f^{(k)}|^2) at the given panel count, compared against
/// a refined rule. Does not throw on non-convergence; inspect `converged`.
NormEstimate hs_norm_estimate(const SobolevSignal& f, int s, std::size_t resolution = 1024, double rel_tol = 1e-6);

/// As hs_norm_estimate but throws ConvergenceError when the refinement check fails.
double hs_norm(const SobolevSignal& f, int s, std::size_t resolution = 1024);

} // namespace specnet
