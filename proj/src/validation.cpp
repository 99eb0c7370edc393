#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "specnet/experiments.hpp"
#include "specnet/spectral.hpp"

namespace specnet {

namespace {

std::string fmt(double v)
{
    return format_double(v);
}

double max_rel_error(const ComplexVec& got, const ComplexVec& want)
{
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < want.size(); ++i) {
        diff = std::max(diff, std::abs(got[i] - want[i]));
        scale = std::max(scale, std::abs(want[i]));
    }
    return diff / std::max(scale, 1e-300);
}

ComplexVec random_complex(std::mt19937_64& rng, std::size_t n)
{
    std::normal_distribution<double> nd;
    ComplexVec z(n);
    for (auto& v : z) v = {nd(rng), nd(rng)};
    return z;
}

struct ExactnessOutcome {
    double worst = 0.0;
    bool audit_ok = true;
    std::string audit_detail;
    double r2 = 0.0;
};

ExactnessOutcome exactness_and_audit(const ExperimentConfig& cfg, const std::string& dir)
{
    std::mt19937_64 rng(cfg.seed);
    std::ofstream ex(dir + "/validate_exactness.csv");
    ex << "network,k,m,max_rel_error\n";
    std::ofstream au(dir + "/validate_audit.csv");
    au << "k,m,depth,max_channels,active_weights\n";
    ExactnessOutcome out;
    std::vector<std::size_t> depth_at_k(static_cast<std::size_t>(cfg.validate_max_k) + 1, 0);
    std::vector<double> mk, aw;
    for (int k = 1; k <= cfg.validate_max_k; ++k) {
        const std::size_t n = std::size_t{1} << k;
        double e_phi = 0.0, e_f = 0.0;
        std::uniform_real_distribution<double> omega_dist(-50.0, 50.0);
        for (int s = 0; s < cfg.validate_samples; ++s) {
            const cplx z = random_complex(rng, 1)[0];
            const ComplexVec w = random_complex(rng, n / 2);
            ComplexVec want(n);
            for (std::size_t i = 0; i < n / 2; ++i) {
                want[2 * i] = w[i];
                want[2 * i + 1] = z * w[i];
            }
            e_phi = std::max(e_phi, max_rel_error(extract(network_forward(build_phi_z(k, z).graph, embed(w))), want));

            const double omega = omega_dist(rng);
            const ComplexVec w0 = random_complex(rng, 1);
            for (std::size_t j = 0; j < n; ++j) {
                const double x = static_cast<double>(j) * std::ldexp(1.0, -k);
                want[j] = w0[0] * std::polar(1.0, omega * x);
            }
            e_f = std::max(e_f, max_rel_error(extract(network_forward(build_F_omega(k, omega).graph, embed(w0))), want));
        }
        ex << "phi_z," << k << ",0," << fmt(e_phi) << "\n";
        ex << "F_omega," << k << ",0," << fmt(e_f) << "\n";
        out.worst = std::max({out.worst, e_phi, e_f});

        for (int m = 1; m <= cfg.validate_max_m; ++m) {
            const SpectralNet net = build_S_m(k, m);
            const DyadicGrid grid(k);
            double e_s = 0.0;
            for (int s = 0; s < cfg.validate_samples; ++s) {
                FourierCoeffs Z{m, random_complex(rng, 2 * static_cast<std::size_t>(m) + 1), 0.0};
                ComplexVec want(grid.nodes());
                for (std::size_t j = 0; j < grid.nodes(); ++j) want[j] = truncated_series_eval(Z, grid.node(j));
                e_s = std::max(e_s, max_rel_error(extract(network_forward(net.graph, embed(Z.z))), want));
            }
            ex << "S_m," << k << ',' << m << ',' << fmt(e_s) << "\n";
            out.worst = std::max(out.worst, e_s);

            const std::size_t depth = net.graph.depth();
            const std::size_t channels = net.graph.max_conv_channels();
            const std::size_t weights = count_active_weights(net.graph);
            au << k << ',' << m << ',' << depth << ',' << channels << ',' << weights << "\n";
            if (m == 1) depth_at_k[k] = depth;
            else if (depth != depth_at_k[k]) {
                out.audit_ok = false;
                out.audit_detail += "depth varies with m at k=" + std::to_string(k) + "; ";
            }
            if (channels > 8 * (2 * static_cast<std::size_t>(m) + 1)) {
                out.audit_ok = false;
                out.audit_detail += "channels exceed 8(2m+1) at k=" + std::to_string(k) + ",m=" + std::to_string(m) + "; ";
            }
            mk.push_back(static_cast<double>(m) * k);
            aw.push_back(static_cast<double>(weights));
        }
    }
    for (int k = 3; k <= cfg.validate_max_k; ++k) {
        const auto d1 = static_cast<long long>(depth_at_k[k]) - static_cast<long long>(depth_at_k[k - 1]);
        const auto d0 = static_cast<long long>(depth_at_k[k - 1]) - static_cast<long long>(depth_at_k[k - 2]);
        if (d1 != d0) {
            out.audit_ok = false;
            out.audit_detail += "depth not affine in k at k=" + std::to_string(k) + "; ";
        }
    }
    // Fit aw = c m k through the origin.
    double sxy = 0.0, sxx = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < mk.size(); ++i) {
        sxy += mk[i] * aw[i];
        sxx += mk[i] * mk[i];
        mean += aw[i];
    }
    mean /= static_cast<double>(aw.size());
    const double c = sxy / sxx;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < mk.size(); ++i) {
        ss_res += (aw[i] - c * mk[i]) * (aw[i] - c * mk[i]);
        ss_tot += (aw[i] - mean) * (aw[i] - mean);
    }
    out.r2 = 1.0 - ss_res / ss_tot;
    out.audit_detail += "fit c=" + fmt(c) + " R2=" + fmt(out.r2);
    return out;
}

Check lipschitz_check(const ExperimentConfig& cfg, const std::string& dir)
{
    constexpr int k = 6, m = 8, pairs = 10000;
    const NetworkGraph psi = build_Psi_real(k, m);
    std::mt19937_64 rng(cfg.seed + 1);
    std::normal_distribution<double> nd;
    const std::size_t dim = 4 * m + 2;
    std::size_t violations = 0;
    double worst_ratio = 0.0;
    for (int p = 0; p < pairs; ++p) {
        Tensor2 a(1, dim), b(1, dim);
        double l1 = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            a(0, i) = nd(rng);
            b(0, i) = nd(rng);
            l1 += std::abs(a(0, i) - b(0, i));
        }
        const Tensor2 ya = network_forward(psi, a);
        const Tensor2 yb = network_forward(psi, b);
        for (std::size_t j = 0; j < ya.length(); ++j) {
            const double d = std::abs(ya(0, j) - yb(0, j));
            worst_ratio = std::max(worst_ratio, d / l1);
            if (d > l1) ++violations;
        }
    }
    std::ofstream os(dir + "/validate_lipschitz.csv");
    os << "k,m,pairs,violations,max_ratio\n" << k << ',' << m << ',' << pairs << ',' << violations << ',' << fmt(worst_ratio) << "\n";
    return {"lipschitz", violations == 0, "violations=" + std::to_string(violations) + " max_ratio=" + fmt(worst_ratio)};
}

// Weights of the one-sided (direction = +1 or -1) stencil for the d-th derivative
// on the points x + direction * i * h, i = 0..n-1. Solved on integer offsets and
// rescaled, which keeps the Vandermonde system well conditioned.
std::vector<double> one_sided_weights(int d, int n, int direction, double h)
{
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (int r = 0; r < n; ++r) {
        for (int i = 0; i < n; ++i) A(r, i) = std::pow(static_cast<double>(direction * i), r);
    }
    double fact = 1.0;
    for (int i = 2; i <= d; ++i) fact *= i;
    rhs[d] = fact;
    const Eigen::VectorXd w = A.fullPivLu().solve(rhs) / std::pow(h, d);
    return {w.data(), w.data() + n};
}

double one_sided(const SobolevSignal& f, double x, int d, int direction)
{
    constexpr double h = 1e-3;
    const int n = d + 4;
    const auto w = one_sided_weights(d, n, direction, h);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += w[i] * f(x + direction * i * h);
    return acc;
}

Check periodization_check(const ExperimentConfig& cfg, const std::string& dir)
{
    constexpr double tol = 1e-4;
    std::mt19937_64 rng(cfg.seed + 2);
    std::uniform_real_distribution<double> coef(-1.0, 1.0), kink(0.1, 0.9);
    std::uniform_int_distribution<int> smooth(1, 3);
    std::ofstream os(dir + "/validate_periodization.csv");
    os << "signal,s,order,jump_half,jump_wrap\n";
    double worst = 0.0;
    bool fidelity = true;
    for (int i = 0; i < 20; ++i) {
        const int s = smooth(rng);
        std::vector<double> c(6);
        for (auto& v : c) v = coef(rng);
        const double b = kink(rng);
        const SobolevSignal f = add(polynomial_signal(c, s), abs_power_signal(b, 2.0 * s - 1.0, s, coef(rng)));
        const SobolevSignal ft = fold(f, hermite_basis(s));
        for (int d = 0; d < s; ++d) {
            const double jh = std::abs(one_sided(ft, 0.5, d, -1) - one_sided(ft, 0.5, d, +1));
            const double jw = std::abs(one_sided(ft, 1.0, d, -1) - one_sided(ft, 0.0, d, +1));
            worst = std::max({worst, jh, jw});
            os << i << ',' << s << ',' << d << ',' << fmt(jh) << ',' << fmt(jw) << "\n";
        }
        const DyadicGrid grid(10);
        for (std::size_t j = 0; j < grid.nodes(); ++j) {
            const double x = grid.node(j);
            if (ft((x + 1.0) / 2.0) != f(x)) fidelity = false;
        }
    }
    return {"periodization", worst <= tol && fidelity,
            "max_fd_jump=" + fmt(worst) + " fold_fidelity=" + (fidelity ? "exact" : "broken")};
}

std::vector<Check> fhn_checks(const ExperimentConfig& cfg, const std::string& dir)
{
    std::vector<Check> out;
    std::ofstream os(dir + "/validate_fhn.csv");

    FHNConfig zero = cfg.fhn;
    zero.forcing_amplitude = 0.0;
    const FHNTrajectory z = fhn_solve(0.0275, zero);
    bool all_zero = true;
    for (std::size_t n = 0; n < z.u.size(); ++n) {
        for (std::size_t j = 0; j < z.u[n].size(); ++j) all_zero = all_zero && z.u[n][j] == 0.0 && z.w[n][j] == 0.0;
    }
    out.push_back({"fhn_zero_fixed_point", all_zero, all_zero ? "exact" : "nonzero state"});

    FHNConfig fine = cfg.fhn;
    fine.dt = 1e-4;
    std::vector<std::vector<double>> finals;
    for (int k = 6; k <= 10; ++k) {
        fine.level = k;
        finals.push_back(fhn_solve(0.0275, fine).u.back());
    }
    std::vector<double> diffs;
    for (std::size_t i = 0; i + 1 < finals.size(); ++i) {
        double d = 0.0;
        for (std::size_t j = 0; j < finals[i].size(); ++j) d = std::max(d, std::abs(finals[i][j] - finals[i + 1][2 * j]));
        diffs.push_back(d);
    }
    os << "quantity,key,value\n";
    bool ratios_ok = true;
    std::string detail;
    for (std::size_t i = 0; i + 1 < diffs.size(); ++i) {
        const double r = diffs[i] / diffs[i + 1];
        ratios_ok = ratios_ok && r >= 3.0 && r <= 5.0;
        os << "self_convergence_ratio," << i + 6 << ',' << fmt(r) << "\n";
        detail += fmt(r) + " ";
    }
    out.push_back({"fhn_space_order", ratios_ok, "ratios " + detail});

    const double mus[] = {0.005, 0.0133, 0.0464, 0.05};
    double prev = INFINITY;
    bool monotone = true;
    detail.clear();
    for (double mu : mus) {
        const FHNTrajectory tr = fhn_solve(mu, cfg.fhn);
        const double s = max_slope(tr.u.back(), DyadicGrid(cfg.fhn.level).step());
        monotone = monotone && s < prev;
        prev = s;
        os << "steepness," << fmt(mu) << ',' << fmt(s) << "\n";
        detail += fmt(s) + " ";
    }
    out.push_back({"fhn_front_steepness", monotone, "max|u_x| " + detail});
    return out;
}

Check gradient_check(const ExperimentConfig& cfg, const std::string& dir)
{
    std::ofstream os(dir + "/validate_gradient.csv");
    os << "problem,m,w,L,max_rel_error\n";
    double worst = 0.0;
    auto run = [&](const std::string& problem, const ArchSpec& a, const Dataset& data) {
        const FrozenDecoder dec = FrozenDecoder::from_network(data.level, a.m);
        MLPParams p = init_he({a.p, a.w, a.L, 4 * a.m + 2, a.slope}, cfg.seed + 3);
        std::mt19937_64 rng(cfg.seed + 4);
        std::normal_distribution<double> nd(0.0, 0.1);
        for (Eigen::Index i = 0; i < p.theta.size(); ++i) p.theta[i] += nd(rng); // nonzero biases
        const Eigen::VectorXd g = grad(p, dec, data);
        // Components far below the largest one are compared on the scale of the largest.
        const double floor = 1e-4 * g.lpNorm<Eigen::Infinity>();
        std::uniform_int_distribution<Eigen::Index> pick(0, p.theta.size() - 1);
        double err = 0.0;
        for (int t = 0; t < 50; ++t) {
            const Eigen::Index i = pick(rng);
            const double h = 1e-5 * std::max(1.0, std::abs(p.theta[i]));
            MLPParams q = p;
            q.theta[i] = p.theta[i] + h;
            const double fp = loss(q, dec, data);
            q.theta[i] = p.theta[i] - h;
            const double fm = loss(q, dec, data);
            const double fd = (fp - fm) / (2.0 * h);
            err = std::max(err, std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), floor}));
        }
        os << problem << ',' << a.m << ',' << a.w << ',' << a.L << ',' << fmt(err) << "\n";
        worst = std::max(worst, err);
    };
    auto subset = [](const Dataset& d, std::size_t n) {
        Dataset s = d;
        s.mu = d.mu.topRows(static_cast<Eigen::Index>(std::min(n, d.size())));
        s.u = d.u.topRows(static_cast<Eigen::Index>(std::min(n, d.size())));
        return s;
    };
    for (int k : cfg.bench_k) {
        Dataset d = benchmark_dataset(64, k, cfg.bench_train_seed, "train");
        normalize_inputs(d, benchmark_box());
        ArchSpec a = cfg.bench_initial;
        a.p = 3;
        for (int j = 1; j <= cfg.levels; ++j) {
            if (j > 1) a = scale_architecture(a, 3, 2.0, cfg.bench_depth_increment);
            run("benchmark_k" + std::to_string(k), a, d);
        }
    }
    FHNDatasets ds = fhn_dataset(cfg.fhn);
    Dataset d = subset(ds.train, 64);
    normalize_inputs(d, {{fhn_mu_min, 0.0}, {fhn_mu_max, cfg.fhn.final_time}});
    for (ArchSpec a : cfg.fhn_initial) {
        a.p = 2;
        for (int j = 1; j <= cfg.levels; ++j) {
            if (j > 1) a = scale_architecture(a, 1, std::numeric_limits<double>::infinity(), cfg.fhn_depth_increment);
            run("fhn", a, d);
        }
    }
    return {"gradient", worst <= 1e-5, "max_rel_error=" + fmt(worst)};
}

std::vector<Check> fig1_checks(const ExperimentConfig& cfg, const std::string& dir, bool plot)
{
    const std::vector<SobolevSignal> signals{abs_shift_signal(), pow_3_2_signal()};
    const Fig1Result res = run_fig1(signals, cfg.fig1_m, cfg.fig1_k);
    {
        std::ofstream os(dir + "/fig1.csv");
        write_fig1_csv(os, res.rows);
    }
    std::vector<Check> out;
    SvgPlot svg{"truncation error", "m", "max error", {}, {}};
    for (std::size_t si = 0; si < signals.size(); ++si) {
        const auto& f = signals[si];
        const NormEstimate& ne = res.norms[si].second;
        const double norm = ne.converged ? ne.value : std::min(ne.value, ne.refined);
        const double factor = std::sqrt(2.0 / (2.0 * f.smoothness - 1.0));
        bool bound_ok = true, mono_ok = true, grid_ok = true;
        std::string slopes;
        double slope_lo = f.smoothness == 1 ? -0.65 : -1.85;
        double slope_hi = f.smoothness == 1 ? -0.35 : -1.15;
        bool slope_ok = true;
        std::vector<std::vector<double>> curves;
        for (int k : cfg.fig1_k) {
            std::vector<double> ms, es;
            for (const auto& r : res.rows) {
                if (r.signal != f.name || r.k != k) continue;
                ms.push_back(r.m);
                es.push_back(r.error);
                const double bound = factor * std::pow(r.m, 0.5 - f.smoothness) * norm * 1.05;
                bound_ok = bound_ok && r.error <= bound;
            }
            for (std::size_t i = 1; i < es.size(); ++i) mono_ok = mono_ok && es[i] <= 1.05 * es[i - 1];
            const double slope = ms.size() >= 2 ? loglog_slope(ms, es) : 0.0;
            slope_ok = slope_ok && slope >= slope_lo && slope <= slope_hi;
            slopes += "k=" + std::to_string(k) + ":" + fmt(slope) + " ";
            curves.push_back(es);
            svg.series.push_back({f.name + " k=" + std::to_string(k), ms, es});
        }
        for (std::size_t a = 0; a < curves.size(); ++a) {
            for (std::size_t b = a + 1; b < curves.size(); ++b) {
                for (std::size_t i = 0; i < curves[a].size(); ++i) {
                    const double r = curves[a][i] / curves[b][i];
                    grid_ok = grid_ok && r >= 0.8 && r <= 1.25;
                }
            }
        }
        const std::string norm_note = "Hs_norm=" + fmt(norm) + (ne.converged ? "" : " (refinement not converged)");
        out.push_back({"fig1_bound_" + f.name, bound_ok, norm_note});
        out.push_back({"fig1_slope_" + f.name, slope_ok,
                       slopes + "required [" + fmt(slope_lo) + "," + fmt(slope_hi) + "]"});
        out.push_back({"fig1_grid_independence_" + f.name, grid_ok, "ratio band [0.8,1.25]"});
        out.push_back({"fig1_monotone_" + f.name, mono_ok, "5% plateau tolerance"});
    }
    if (plot && !cfg.fig1_m.empty()) {
        const double m0 = cfg.fig1_m.front();
        for (const auto& s : svg.series) {
            if (s.name.find("k=" + std::to_string(cfg.fig1_k.front())) == std::string::npos) continue;
            const bool first = s.name.rfind(signals[0].name, 0) == 0;
            svg.guides.push_back({first ? -0.5 : -1.5, m0, s.y.front(), first ? "m^-1/2" : "m^-3/2"});
        }
        emit_svg(svg, dir + "/fig1.svg");
    }
    return out;
}

} // namespace

std::vector<Check> run_validation(const ExperimentConfig& cfg, const std::string& dir, bool plot)
{
    std::filesystem::create_directories(dir);
    std::vector<Check> checks;
    const ExactnessOutcome ex = exactness_and_audit(cfg, dir);
    checks.push_back({"exactness", ex.worst <= 1e-10, "max_rel_error=" + fmt(ex.worst)});
    checks.push_back({"architecture_audit", ex.audit_ok && ex.r2 >= 0.99, ex.audit_detail});
    checks.push_back(lipschitz_check(cfg, dir));
    checks.push_back(periodization_check(cfg, dir));
    for (auto& c : fig1_checks(cfg, dir, plot)) checks.push_back(std::move(c));
    checks.push_back(gradient_check(cfg, dir));
    for (auto& c : fhn_checks(cfg, dir)) checks.push_back(std::move(c));

    std::ofstream os(dir + "/validate_checks.csv");
    os << "check,passed,detail\n";
    for (const auto& c : checks) os << c.name << ',' << (c.passed ? "PASS" : "FAIL") << ",\"" << c.detail << "\"\n";
    return checks;
}

} // namespace specnet
