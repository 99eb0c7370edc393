#include "specnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "specnet/kv.hpp"
#include "specnet/spectral.hpp"

namespace specnet {

std::size_t MLPShape::parameter_count() const
{
    std::size_t n = 0;
    for (std::size_t l = 0; l < layer_count(); ++l) {
        n += static_cast<std::size_t>(layer_out(l)) * static_cast<std::size_t>(layer_in(l) + 1);
    }
    return n;
}

std::size_t MLPParams::offset(std::size_t l) const
{
    std::size_t off = 0;
    for (std::size_t i = 0; i < l; ++i) {
        off += static_cast<std::size_t>(shape.layer_out(i)) * static_cast<std::size_t>(shape.layer_in(i) + 1);
    }
    return off;
}

Eigen::Map<const Eigen::MatrixXd> MLPParams::W(std::size_t l) const
{
    return {theta.data() + offset(l), shape.layer_out(l), shape.layer_in(l)};
}

Eigen::Map<const Eigen::VectorXd> MLPParams::b(std::size_t l) const
{
    const std::size_t off = offset(l) + static_cast<std::size_t>(shape.layer_out(l)) * shape.layer_in(l);
    return {theta.data() + off, shape.layer_out(l)};
}

MLPParams init_he(const MLPShape& shape, std::uint64_t seed)
{
    if (shape.inputs < 1 || shape.width < 1 || shape.hidden_layers < 0 || shape.outputs < 1) {
        throw std::invalid_argument("init_he: all layer sizes must be positive");
    }
    MLPParams p{shape, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(shape.parameter_count()))};
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l < shape.layer_count(); ++l) {
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / shape.layer_in(l)));
        const std::size_t off = p.offset(l);
        const std::size_t count = static_cast<std::size_t>(shape.layer_out(l)) * shape.layer_in(l);
        for (std::size_t i = 0; i < count; ++i) p.theta[static_cast<Eigen::Index>(off + i)] = dist(rng);
    }
    return p;
}

NetworkGraph mlp_graph(const MLPParams& p)
{
    NetworkGraph g(Shape{1, static_cast<std::size_t>(p.shape.inputs)});
    for (std::size_t l = 0; l < p.shape.layer_count(); ++l) {
        const auto W = p.W(l);
        Matrix m(static_cast<std::size_t>(W.rows()), static_cast<std::size_t>(W.cols()));
        for (Eigen::Index i = 0; i < W.rows(); ++i) {
            for (Eigen::Index j = 0; j < W.cols(); ++j) m(i, j) = W(i, j);
        }
        const auto b = p.b(l);
        std::vector<double> bias(b.data(), b.data() + b.size());
        const bool last = l + 1 == p.shape.layer_count();
        g.push(DenseLayer{std::move(m), std::move(bias),
                          last ? Activation::identity() : Activation::leaky_relu(p.shape.slope)});
    }
    return g;
}

FrozenDecoder FrozenDecoder::from_network(int level, int modes)
{
    const auto in_dim = static_cast<std::size_t>(4 * modes + 2);
    const Matrix m = materialize_linear_map(build_Psi_real(level, modes), in_dim);
    FrozenDecoder d;
    d.level = level;
    d.modes = modes;
    d.V.resize(static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols));
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) d.V(i, j) = m(i, j);
    }
    return d;
}

namespace {

double leaky(double z, double slope) { return z >= 0.0 ? z : slope * z; }

struct ForwardCache {
    std::vector<Eigen::MatrixXd> a; // a[0] = input, a[l+1] = output of layer l
    std::vector<Eigen::MatrixXd> z; // pre-activations
};

ForwardCache forward_cached(const MLPParams& p, const Eigen::MatrixXd& input)
{
    if (input.rows() != p.shape.inputs) throw std::invalid_argument("mlp_forward: input dimension mismatch");
    ForwardCache c;
    c.a.push_back(input);
    for (std::size_t l = 0; l < p.shape.layer_count(); ++l) {
        Eigen::MatrixXd z = p.W(l) * c.a.back();
        z.colwise() += p.b(l);
        Eigen::MatrixXd a = z;
        if (l + 1 < p.shape.layer_count()) a = z.unaryExpr([s = p.shape.slope](double v) { return leaky(v, s); });
        c.z.push_back(std::move(z));
        c.a.push_back(std::move(a));
    }
    return c;
}

void check_decoder(const MLPParams& p, const FrozenDecoder& dec)
{
    if (dec.V.cols() != p.shape.outputs) throw std::invalid_argument("decoder input dimension does not match MLP output");
}

} // namespace

Eigen::MatrixXd mlp_forward(const MLPParams& p, const Eigen::MatrixXd& mu)
{
    return std::move(forward_cached(p, mu).a.back());
}

Eigen::MatrixXd model_forward(const MLPParams& p, const FrozenDecoder& dec, const Eigen::MatrixXd& mu)
{
    check_decoder(p, dec);
    return dec.V * mlp_forward(p, mu.transpose());
}

double loss(const MLPParams& p, const FrozenDecoder& dec, const Dataset& data)
{
    if (data.size() == 0) return 0.0;
    const Eigen::MatrixXd r = model_forward(p, dec, data.mu) - data.u.transpose();
    return std::ldexp(1.0, -data.level) / static_cast<double>(data.size()) * r.squaredNorm();
}

double loss_and_grad(const MLPParams& p, const FrozenDecoder& dec, const Dataset& data, Eigen::VectorXd& grad)
{
    check_decoder(p, dec);
    grad.setZero(p.theta.size());
    if (data.size() == 0) return 0.0;
    const double scale = std::ldexp(1.0, -data.level) / static_cast<double>(data.size());
    const ForwardCache c = forward_cached(p, data.mu.transpose());
    const Eigen::MatrixXd r = dec.V * c.a.back() - data.u.transpose();
    const double value = scale * r.squaredNorm();

    Eigen::MatrixXd delta = (2.0 * scale) * (dec.V.transpose() * r);
    for (std::size_t l = p.shape.layer_count(); l-- > 0;) {
        if (l + 1 < p.shape.layer_count()) {
            const double s = p.shape.slope;
            delta = delta.cwiseProduct(c.z[l].unaryExpr([s](double v) { return v >= 0.0 ? 1.0 : s; }));
        }
        const auto off = static_cast<Eigen::Index>(p.offset(l));
        const Eigen::Index rows = p.shape.layer_out(l);
        const Eigen::Index cols = p.shape.layer_in(l);
        Eigen::Map<Eigen::MatrixXd>(grad.data() + off, rows, cols) = delta * c.a[l].transpose();
        grad.segment(off + rows * cols, rows) = delta.rowwise().sum();
        if (l > 0) delta = p.W(l).transpose() * delta;
    }
    return value;
}

Eigen::VectorXd grad(const MLPParams& p, const FrozenDecoder& dec, const Dataset& data)
{
    Eigen::VectorXd g;
    loss_and_grad(p, dec, data, g);
    return g;
}

double test_error(const MLPParams& p, const FrozenDecoder& dec, const Dataset& data)
{
    if (data.size() == 0) return 0.0;
    return (model_forward(p, dec, data.mu) - data.u.transpose()).cwiseAbs().maxCoeff();
}

namespace {

struct Probe {
    double alpha = 0.0;
    double f = 0.0;
    double slope = 0.0;
    Eigen::VectorXd g;
};

// Minimizer of the cubic through (a, fa, da), (b, fb, db), or NaN.
double cubic_min(double a, double fa, double da, double b, double fb, double db)
{
    const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
    const double disc = d1 * d1 - da * db;
    if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    return b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
}

// Strong Wolfe line search; returns false when no acceptable step is found.
bool strong_wolfe(const Objective& f, const Eigen::VectorXd& x, double f0, const Eigen::VectorXd& g0,
                  const Eigen::VectorXd& d, double alpha0, const TrainConfig& cfg, Probe& out)
{
    const double slope0 = g0.dot(d);
    if (!(slope0 < 0.0)) return false;
    auto eval = [&](double alpha) {
        Probe p;
        p.alpha = alpha;
        p.f = f(x + alpha * d, p.g);
        p.slope = p.g.dot(d);
        return p;
    };
    auto armijo = [&](const Probe& p) { return std::isfinite(p.f) && p.f <= f0 + cfg.c1 * p.alpha * slope0; };
    auto curvature = [&](const Probe& p) { return std::abs(p.slope) <= -cfg.c2 * slope0; };

    Probe prev{0.0, f0, slope0, g0};
    Probe lo, hi;
    bool bracketed = false;
    double alpha = alpha0;
    int evals = 0;
    while (evals < cfg.max_line_search) {
        Probe cur = eval(alpha);
        ++evals;
        if (!armijo(cur) || (evals > 1 && cur.f >= prev.f)) {
            lo = prev;
            hi = cur;
            bracketed = true;
            break;
        }
        if (curvature(cur)) {
            out = std::move(cur);
            return true;
        }
        if (cur.slope >= 0.0) {
            lo = cur;
            hi = prev;
            bracketed = true;
            break;
        }
        prev = std::move(cur);
        alpha *= 2.0;
    }
    if (!bracketed) {
        if (prev.alpha > 0.0) {
            out = std::move(prev); // sufficient decrease holds; curvature may not
            return true;
        }
        return false;
    }
    while (evals < cfg.max_line_search) {
        const double a = std::min(lo.alpha, hi.alpha);
        const double b = std::max(lo.alpha, hi.alpha);
        if (b - a <= 1e-14 * std::max(1.0, b)) break;
        double trial = std::isfinite(hi.f) ? cubic_min(lo.alpha, lo.f, lo.slope, hi.alpha, hi.f, hi.slope)
                                           : std::numeric_limits<double>::quiet_NaN();
        const double margin = 0.1 * (b - a);
        if (!std::isfinite(trial) || trial < a + margin || trial > b - margin) trial = 0.5 * (a + b);
        Probe cur = eval(trial);
        ++evals;
        if (!armijo(cur) || cur.f >= lo.f) {
            hi = std::move(cur);
        } else {
            if (curvature(cur)) {
                out = std::move(cur);
                return true;
            }
            if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
            lo = std::move(cur);
        }
    }
    if (lo.alpha > 0.0 && lo.f < f0) {
        out = std::move(lo);
        return true;
    }
    return false;
}

// Backtracking along -g; false when no decrease is found.
bool steepest_descent_step(const Objective& f, const Eigen::VectorXd& x, double f0, const Eigen::VectorXd& g0,
                           double c1, Probe& out)
{
    const double gg = g0.squaredNorm();
    double alpha = std::min(1.0, 1.0 / std::max(g0.lpNorm<1>(), 1e-300));
    for (int i = 0; i < 60; ++i) {
        Probe p;
        p.alpha = alpha;
        p.f = f(x - alpha * g0, p.g);
        if (std::isfinite(p.f) && p.f <= f0 - c1 * alpha * gg && p.f < f0) {
            out = std::move(p);
            return true;
        }
        alpha *= 0.5;
    }
    return false;
}

} // namespace

OptimizeResult optimize_lbfgs(Eigen::VectorXd x0, const Objective& f, const TrainConfig& cfg)
{
    OptimizeResult res;
    res.x = std::move(x0);
    Eigen::VectorXd g;
    res.value = f(res.x, g);
    res.trace.push_back({0, res.value, g.norm()});
    if (!std::isfinite(res.value)) return res;

    std::vector<Eigen::VectorXd> S, Y;
    std::vector<double> rho;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        if (g.lpNorm<Eigen::Infinity>() <= cfg.grad_tol) {
            res.converged = true;
            break;
        }
        // Two-loop recursion.
        Eigen::VectorXd q = -g;
        std::vector<double> alpha(S.size());
        for (std::size_t i = S.size(); i-- > 0;) {
            alpha[i] = rho[i] * S[i].dot(q);
            q -= alpha[i] * Y[i];
        }
        if (!S.empty()) q *= S.back().dot(Y.back()) / Y.back().squaredNorm();
        for (std::size_t i = 0; i < S.size(); ++i) {
            const double beta = rho[i] * Y[i].dot(q);
            q += (alpha[i] - beta) * S[i];
        }
        const double step0 = S.empty() ? std::min(1.0, 1.0 / g.lpNorm<1>()) : 1.0;

        Probe p;
        Eigen::VectorXd step;
        if (strong_wolfe(f, res.x, res.value, g, q, step0, cfg, p)) {
            step = p.alpha * q;
        } else {
            ++res.line_search_failures;
            S.clear();
            Y.clear();
            rho.clear();
            if (!steepest_descent_step(f, res.x, res.value, g, cfg.c1, p)) break;
            step = -p.alpha * g;
        }
        const Eigen::VectorXd y = p.g - g;
        const double sy = step.dot(y);
        if (sy > 1e-12 * step.norm() * y.norm()) {
            if (static_cast<int>(S.size()) == cfg.history) {
                S.erase(S.begin());
                Y.erase(Y.begin());
                rho.erase(rho.begin());
            }
            S.push_back(step);
            Y.push_back(y);
            rho.push_back(1.0 / sy);
        }
        res.x += step;
        res.value = p.f;
        g = std::move(p.g);
        res.trace.push_back({it, res.value, g.norm()});
    }
    if (g.lpNorm<Eigen::Infinity>() <= cfg.grad_tol) res.converged = true;
    return res;
}

OptimizeResult optimize_adam(Eigen::VectorXd x0, const Objective& f, const TrainConfig& cfg)
{
    OptimizeResult res;
    res.x = std::move(x0);
    Eigen::VectorXd g;
    res.value = f(res.x, g);
    res.trace.push_back({0, res.value, g.norm()});
    Eigen::VectorXd m = Eigen::VectorXd::Zero(res.x.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(res.x.size());
    double b1t = 1.0, b2t = 1.0;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        if (!std::isfinite(res.value)) break;
        if (g.lpNorm<Eigen::Infinity>() <= cfg.grad_tol) {
            res.converged = true;
            break;
        }
        b1t *= cfg.beta1;
        b2t *= cfg.beta2;
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseAbs2();
        const Eigen::VectorXd mhat = m / (1.0 - b1t);
        const Eigen::VectorXd vhat = v / (1.0 - b2t);
        res.x -= cfg.learning_rate * mhat.cwiseQuotient((vhat.cwiseSqrt().array() + cfg.adam_eps).matrix());
        res.value = f(res.x, g);
        res.trace.push_back({it, res.value, g.norm()});
    }
    if (g.lpNorm<Eigen::Infinity>() <= cfg.grad_tol) res.converged = true;
    return res;
}

TrainedModel train_single(const MLPShape& shape, const FrozenDecoder& dec, const Dataset& data, const TrainConfig& cfg,
                          std::uint64_t seed)
{
    TrainedModel model;
    model.seed = seed;
    model.params = init_he(shape, seed);
    MLPParams work = model.params;
    const Objective obj = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        work.theta = x;
        return loss_and_grad(work, dec, data, g);
    };
    model.result = cfg.optimizer == OptimizerKind::lbfgs ? optimize_lbfgs(model.params.theta, obj, cfg)
                                                         : optimize_adam(model.params.theta, obj, cfg);
    model.params.theta = model.result.x;
    model.diverged = !std::isfinite(model.result.value) || !model.result.x.allFinite();
    return model;
}

EnsembleResult train_ensemble(const MLPShape& shape, const FrozenDecoder& dec, const Dataset& data,
                              const TrainConfig& cfg)
{
    if (cfg.restarts < 1) throw std::invalid_argument("train_ensemble: restarts must be >= 1");
    EnsembleResult out;
    out.members.resize(static_cast<std::size_t>(cfg.restarts));
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < cfg.restarts; ++r) {
        out.members[r] = train_single(shape, dec, data, cfg, cfg.seed + static_cast<std::uint64_t>(r));
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < out.members.size(); ++r) {
        const auto& m = out.members[r];
        if (!m.diverged && m.result.value < best) {
            best = m.result.value;
            out.best = r;
        }
    }
    return out;
}

void write_trace(std::ostream& os, const std::vector<TraceRow>& trace)
{
    os << "iteration,loss,grad_norm\n";
    for (const auto& r : trace) os << r.iteration << ',' << format_double(r.loss) << ',' << format_double(r.grad_norm) << '\n';
}

} // namespace specnet
