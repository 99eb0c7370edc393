#include "specnet/periodize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

namespace specnet {

double fd_derivative(const std::function<double(double)>& f, double x, int order, double step)
{
    if (order == 0) return f(x);
    if (order < 0) throw std::invalid_argument("fd_derivative: negative order");
    const double h = order == 1 ? step : std::max(step, std::pow(1e-16, 1.0 / (order + 2)));
    // Binomial stencil sum_i (-1)^{order-i} C(order,i) f(x0 + i h) / h^order.
    double x0 = x - 0.5 * order * h;
    if (x0 < 0.0) x0 = x;                                  // forward
    else if (x0 + order * h > 1.0) x0 = x - order * h;     // backward
    double acc = 0.0;
    double binom = 1.0;
    for (int i = 0; i <= order; ++i) {
        const double sign = (order - i) % 2 == 0 ? 1.0 : -1.0;
        acc += sign * binom * f(x0 + i * h);
        binom = binom * (order - i) / (i + 1);
    }
    return acc / std::pow(h, order);
}

SobolevSignal fd_signal(std::function<double(double)> f, int smoothness, std::vector<double> breakpoints,
                        std::string name)
{
    if (smoothness < 1) throw std::invalid_argument("fd_signal: smoothness must be >= 1");
    DerivativeFn eval = [f = std::move(f)](double x, int d) { return fd_derivative(f, x, d); };
    return {std::move(eval), smoothness, std::move(breakpoints), std::move(name)};
}

double poly_derivative(const std::vector<double>& coeffs, double x, int order)
{
    double acc = 0.0;
    for (std::size_t n = coeffs.size(); n-- > static_cast<std::size_t>(order);) {
        double falling = 1.0;
        for (int i = 0; i < order; ++i) falling *= static_cast<double>(n - i);
        acc = acc * x + falling * coeffs[n];
    }
    return acc;
}

SobolevSignal polynomial_signal(std::vector<double> coeffs, int smoothness)
{
    DerivativeFn eval = [c = std::move(coeffs)](double x, int d) { return poly_derivative(c, x, d); };
    return {std::move(eval), smoothness, {}, "polynomial"};
}

SobolevSignal abs_power_signal(double center, double exponent, int smoothness, double scale)
{
    DerivativeFn eval = [=](double x, int d) {
        const double r = std::abs(x - center);
        const double sgn = x >= center ? 1.0 : -1.0;
        double coef = scale;
        for (int i = 0; i < d; ++i) coef *= (exponent - i) * sgn;
        if (coef == 0.0) return 0.0;
        return coef * std::pow(r, exponent - d);
    };
    std::vector<double> bps;
    if (center > 0.0 && center < 1.0) bps.push_back(center);
    return {std::move(eval), smoothness, std::move(bps), "abs_power"};
}

SobolevSignal abs_shift_signal()
{
    SobolevSignal f = abs_power_signal(0.2, 1.0, 1);
    f.name = "abs_shift";
    return f;
}

SobolevSignal pow_3_2_signal()
{
    SobolevSignal f = abs_power_signal(0.0, 1.5, 2);
    f.name = "x_pow_3_2";
    return f;
}

SobolevSignal add(const SobolevSignal& a, const SobolevSignal& b)
{
    std::vector<double> bps = a.breakpoints;
    bps.insert(bps.end(), b.breakpoints.begin(), b.breakpoints.end());
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    DerivativeFn eval = [fa = a.eval, fb = b.eval](double x, int d) { return fa(x, d) + fb(x, d); };
    return {std::move(eval), std::min(a.smoothness, b.smoothness), std::move(bps), a.name + "+" + b.name};
}

SobolevSignal scale(const SobolevSignal& a, double c)
{
    DerivativeFn eval = [fa = a.eval, c](double x, int d) { return c * fa(x, d); };
    return {std::move(eval), a.smoothness, a.breakpoints, a.name};
}

HermiteBasis hermite_basis(int s)
{
    if (s < 1 || s > 8) throw std::invalid_argument("hermite_basis: s must be in [1, 8]");
    const int n = 2 * s;
    // Row k: k-th derivative at 0; row s + k: k-th derivative at 1.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < s; ++k) {
        for (int p = k; p < n; ++p) {
            double falling = 1.0;
            for (int i = 0; i < k; ++i) falling *= p - i;
            if (p == k) A(k, p) = falling;
            A(s + k, p) = falling;
        }
    }
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, s);
    for (int j = 0; j < s; ++j) {
        rhs(j, j) = 1.0;
        rhs(s + j, j) = -1.0;
    }
    const Eigen::MatrixXd sol = A.fullPivLu().solve(rhs);
    const double residual = (A * sol - rhs).cwiseAbs().maxCoeff();
    if (!(residual <= 1e-8)) {
        throw ConvergenceError("hermite_basis: ill-conditioned system, residual " + std::to_string(residual));
    }
    HermiteBasis b;
    b.s = s;
    b.q.assign(s, std::vector<double>(n));
    for (int j = 0; j < s; ++j) {
        for (int p = 0; p < n; ++p) b.q[j][p] = sol(p, j);
    }
    return b;
}

SobolevSignal periodize(const SobolevSignal& f, const HermiteBasis& basis)
{
    std::vector<double> jumps(basis.s);
    for (int j = 0; j < basis.s; ++j) jumps[j] = f.derivative(1.0, j) - f.derivative(0.0, j);
    DerivativeFn eval = [fe = f.eval, basis, jumps](double x, int d) {
        double v = fe(x, d);
        for (int j = 0; j < basis.s; ++j) {
            if (jumps[j] != 0.0) v += jumps[j] * basis.eval(j, x, d);
        }
        return v;
    };
    return {std::move(eval), f.smoothness, f.breakpoints, f.name + ".periodized"};
}

SobolevSignal fold(const SobolevSignal& f, const HermiteBasis& basis)
{
    const SobolevSignal g = periodize(f, basis);
    DerivativeFn eval = [ge = g.eval, fe = f.eval](double x, int d) {
        const double c = std::ldexp(1.0, d);
        return x < 0.5 ? c * ge(2.0 * x, d) : c * fe(2.0 * x - 1.0, d);
    };
    std::vector<double> bps{0.5};
    for (double b : f.breakpoints) {
        bps.push_back(0.5 * b);
        bps.push_back(0.5 * (b + 1.0));
    }
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    return {std::move(eval), f.smoothness, std::move(bps), f.name + ".folded"};
}

namespace {

constexpr double gl_x[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363};
constexpr double gl_w[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

void add_panel(QuadratureRule& r, double a, double b)
{
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    for (int i = 0; i < 4; ++i) {
        r.x.push_back(c - h * gl_x[i]);
        r.w.push_back(h * gl_w[i]);
        r.x.push_back(c + h * gl_x[i]);
        r.w.push_back(h * gl_w[i]);
    }
}

// Panel [a,b] refined geometrically toward `a` (toward_a) or toward `b`.
void add_graded(QuadratureRule& r, double a, double b, bool toward_a, int levels)
{
    constexpr double ratio = 0.25;
    const double len = b - a;
    // Pieces narrower than this would put nodes on top of the breakpoint.
    const double floor_len = 1e3 * std::numeric_limits<double>::epsilon() * std::max({1.0, std::abs(a), std::abs(b)});
    double frac = 1.0;
    for (int i = 0; i < levels; ++i) {
        const double next = frac * ratio;
        if (len * next < floor_len) break;
        if (toward_a) add_panel(r, a + len * next, a + len * frac);
        else add_panel(r, b - len * frac, b - len * next);
        frac = next;
    }
    if (toward_a) add_panel(r, a, a + len * frac);
    else add_panel(r, b - len * frac, b);
}

} // namespace

QuadratureRule composite_rule(std::size_t panels, const std::vector<double>& breakpoints, int grading_levels)
{
    if (panels == 0) throw std::invalid_argument("composite_rule: panels must be positive");
    std::vector<double> special{0.0, 1.0};
    for (double b : breakpoints) {
        if (b > 0.0 && b < 1.0) special.push_back(b);
    }
    std::sort(special.begin(), special.end());
    special.erase(std::unique(special.begin(), special.end()), special.end());

    std::vector<double> cuts = special;
    for (std::size_t i = 1; i < panels; ++i) cuts.push_back(static_cast<double>(i) / static_cast<double>(panels));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto is_special = [&](double v) { return std::binary_search(special.begin(), special.end(), v); };
    QuadratureRule r;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i];
        const double b = cuts[i + 1];
        const bool sa = is_special(a);
        const bool sb = is_special(b);
        if (!sa && !sb) {
            add_panel(r, a, b);
        } else if (sa && sb) {
            const double c = 0.5 * (a + b);
            add_graded(r, a, c, true, grading_levels);
            add_graded(r, c, b, false, grading_levels);
        } else {
            add_graded(r, a, b, sa, grading_levels);
        }
    }
    return r;
}

namespace {

ComplexVec coeffs_with_rule(const SobolevSignal& g, int m, const QuadratureRule& rule)
{
    std::vector<cplx> pos(static_cast<std::size_t>(m) + 1, 0.0);
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
        const double fx = g(rule.x[i]) * rule.w[i];
        const cplx step = std::conj(cis_turns(rule.x[i]));
        cplx e{1.0, 0.0};
        for (int k = 0; k <= m; ++k) {
            // Re-anchor every 64 powers to keep the recurrence error bounded.
            if (k > 0 && k % 64 == 0) e = std::conj(cis_turns(static_cast<double>(k) * rule.x[i]));
            pos[k] += fx * e;
            e *= step;
        }
    }
    ComplexVec z(2 * static_cast<std::size_t>(m) + 1);
    for (int k = 0; k <= m; ++k) {
        z[m + k] = pos[k];
        z[m - k] = std::conj(pos[k]);
    }
    z[m] = {pos[0].real(), 0.0};
    return z;
}

} // namespace

FourierCoeffs fourier_coeffs(const SobolevSignal& g, int m, const QuadratureOptions& opt)
{
    if (m < 1) throw std::invalid_argument("fourier_coeffs: m must be >= 1");
    const std::size_t panels = opt.panels ? opt.panels : 2 * std::max<std::size_t>(64, 8 * static_cast<std::size_t>(m));
    FourierCoeffs out;
    out.m = m;
    out.z = coeffs_with_rule(g, m, composite_rule(panels, g.breakpoints, opt.grading_levels));
    for (const cplx& z : out.z) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            throw ConvergenceError("fourier_coeffs: non-finite coefficient for " + g.name);
        }
    }
    if (opt.check) {
        const ComplexVec fine = coeffs_with_rule(g, m, composite_rule(2 * panels, g.breakpoints, opt.grading_levels + 8));
        double change = 0.0;
        for (std::size_t q = 0; q < fine.size(); ++q) change = std::max(change, std::abs(fine[q] - out.z[q]));
        out.refinement_change = change;
        if (!(change <= opt.tol)) {
            throw ConvergenceError("fourier_coeffs: refinement changed a coefficient by " + std::to_string(change) +
                                   " for " + g.name);
        }
    }
    return out;
}

FourierCoeffs operator_T(const SobolevSignal& f, int m, const QuadratureOptions& opt)
{
    return fourier_coeffs(fold(f, hermite_basis(f.smoothness)), m, opt);
}

cplx truncated_series_eval(const FourierCoeffs& Z, double x)
{
    cplx acc{0.0, 0.0};
    for (std::size_t q = 0; q < Z.z.size(); ++q) {
        const double k = static_cast<double>(q) - Z.m;
        acc += Z.z[q] * cis_turns(k * x);
    }
    return acc;
}

namespace {

double sobolev_sq(const SobolevSignal& f, int s, const QuadratureRule& rule)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
        for (int d = 0; d <= s; ++d) {
            const double v = f.derivative(rule.x[i], d);
            acc += rule.w[i] * v * v;
        }
    }
    return acc;
}

} // namespace

NormEstimate hs_norm_estimate(const SobolevSignal& f, int s, std::size_t resolution, double rel_tol)
{
    if (s < 0) throw std::invalid_argument("hs_norm: s must be >= 0");
    NormEstimate e;
    e.value = std::sqrt(sobolev_sq(f, s, composite_rule(resolution, f.breakpoints, 24)));
    e.refined = std::sqrt(sobolev_sq(f, s, composite_rule(2 * resolution, f.breakpoints, 32)));
    e.relative_change = std::abs(e.refined - e.value) / std::max(e.refined, 1e-300);
    e.converged = std::isfinite(e.value) && std::isfinite(e.refined) && e.relative_change <= rel_tol;
    return e;
}

double hs_norm(const SobolevSignal& f, int s, std::size_t resolution)
{
    const NormEstimate e = hs_norm_estimate(f, s, resolution);
    if (!e.converged) {
        throw ConvergenceError("hs_norm: refinement changed the norm by " + std::to_string(e.relative_change) +
                               " (relative) for " + f.name);
    }
    return e.value;
}

} // namespace specnet
