#include "specnet/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "specnet/spectral.hpp"

namespace specnet {

namespace {

// Ceiling that ignores rounding noise just above an integer.
int ceil_guarded(double v)
{
    return static_cast<int>(std::ceil(v * (1.0 - 1e-12)));
}

} // namespace

double channel_factor(int s)
{
    if (s < 1) throw std::invalid_argument("scale_architecture: s must be >= 1");
    return std::exp2(2.0 / (2.0 * s - 1.0));
}

double width_factor(int s, double r, int p)
{
    if (!(r >= 0.0)) throw std::invalid_argument("scale_architecture: r must be >= 0");
    const double input_term = std::isinf(r) ? 0.0 : p / (r + 1.0);
    return std::exp2(input_term + 2.0 / (2.0 * s - 1.0));
}

ArchSpec scale_architecture(const ArchSpec& a, int s, double r, int l)
{
    ArchSpec b = a;
    b.m = ceil_guarded(a.m * channel_factor(s));
    b.w = ceil_guarded(a.w * width_factor(s, r, a.p));
    b.L = a.L + l;
    return b;
}

int choose_m(double eps, int s, double M, double c)
{
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("choose_m: eps must be in (0, 1)");
    if (!(M > 0.0 && c > 0.0) || s < 1) throw std::invalid_argument("choose_m: M, c must be positive and s >= 1");
    return ceil_guarded(std::pow(eps / 2.0, -2.0 / (2.0 * s - 1.0)) * M * c);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need two or more points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

double reconstruction_error(const SobolevSignal& f, const FourierCoeffs& Z, int k)
{
    const SpectralNet psi = build_Psi(k, Z.m);
    const Tensor2 y = network_forward(psi.graph, embed(Z.z));
    const DyadicGrid grid(k);
    double err = 0.0;
    for (std::size_t j = 0; j < grid.nodes(); ++j) err = std::max(err, std::abs(f(grid.node(j)) - y(0, j)));
    return err;
}

Fig1Result run_fig1(const std::vector<SobolevSignal>& signals, const std::vector<int>& m_list,
                    const std::vector<int>& k_list)
{
    Fig1Result res;
    const std::size_t cells = signals.size() * m_list.size();
    std::vector<std::vector<Fig1Row>> per_cell(cells);
#pragma omp parallel for schedule(dynamic)
    for (std::size_t c = 0; c < cells; ++c) {
        const SobolevSignal& f = signals[c / m_list.size()];
        const int m = m_list[c % m_list.size()];
        const FourierCoeffs Z = operator_T(f, m);
        for (int k : k_list) per_cell[c].push_back({f.name, f.smoothness, k, m, reconstruction_error(f, Z, k)});
    }
    for (auto& v : per_cell) res.rows.insert(res.rows.end(), v.begin(), v.end());
    std::sort(res.rows.begin(), res.rows.end(), [](const Fig1Row& a, const Fig1Row& b) {
        return std::tie(a.signal, a.k, a.m) < std::tie(b.signal, b.k, b.m);
    });
    for (const auto& f : signals) {
        res.norms.emplace_back(f.name, hs_norm_estimate(fold(f, hermite_basis(f.smoothness)), f.smoothness));
    }
    return res;
}

void write_fig1_csv(std::ostream& os, const std::vector<Fig1Row>& rows)
{
    os << "signal,s,k,m,error\n";
    for (const auto& r : rows) os << r.signal << ',' << r.s << ',' << r.k << ',' << r.m << ',' << format_double(r.error) << '\n';
}

void write_scaling_csv(std::ostream& os, const std::vector<ScalingRow>& rows)
{
    os << "level,m,w,L,active_weights,E,seed,wall_s\n";
    for (const auto& r : rows) {
        os << r.level << ',' << r.m << ',' << r.w << ',' << r.L << ',' << r.active_weights << ',' << format_double(r.E)
           << ',' << r.seed << ',' << format_double(r.wall_s) << '\n';
    }
}

std::size_t model_active_weights(const MLPParams& p, int level, int m)
{
    std::size_t dense = 0;
    for (Eigen::Index i = 0; i < p.theta.size(); ++i) dense += p.theta[i] != 0.0;
    return dense + count_active_weights(build_Psi_real(level, m));
}

void normalize_inputs(Dataset& d, const Box& box)
{
    if (box.dim() != d.inputs()) throw std::invalid_argument("normalize_inputs: box dimension mismatch");
    for (std::size_t c = 0; c < box.dim(); ++c) {
        const auto col = static_cast<Eigen::Index>(c);
        d.mu.col(col) = (d.mu.col(col).array() - box.lo[c]) / (box.hi[c] - box.lo[c]);
    }
}

std::vector<ScalingRow> run_scaling(const ArchSpec& initial, int levels, int s, double r, int depth_increment,
                                    const Dataset& train, const Dataset& test, const TrainConfig& cfg)
{
    if (levels < 1) throw std::invalid_argument("run_scaling: levels must be >= 1");
    std::vector<ScalingRow> rows;
    ArchSpec a = initial;
    for (int j = 1; j <= levels; ++j) {
        if (j > 1) a = scale_architecture(a, s, r, depth_increment);
        const auto t0 = std::chrono::steady_clock::now();
        const FrozenDecoder dec = FrozenDecoder::from_network(train.level, a.m);
        const MLPShape shape{a.p, a.w, a.L, 4 * a.m + 2, a.slope};
        const EnsembleResult ens = train_ensemble(shape, dec, train, cfg);
        const TrainedModel& best = ens.winner();
        ScalingRow row;
        row.level = j;
        row.m = a.m;
        row.w = a.w;
        row.L = a.L;
        row.active_weights = model_active_weights(best.params, train.level, a.m);
        row.E = test_error(best.params, dec, test);
        row.seed = best.seed;
        row.train_loss = best.result.value;
        for (const auto& mem : ens.members) {
            row.member_losses.push_back(mem.result.value);
            row.member_diverged.push_back(mem.diverged);
        }
        const auto& tr = best.result.trace;
        for (std::size_t i = tr.size() > 5 ? tr.size() - 5 : 0; i < tr.size(); ++i) row.trace_tail.push_back(tr[i].loss);
        row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::string join_ints(const std::vector<int>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::vector<int> split_ints(const std::string& s)
{
    std::vector<int> v;
    for (const auto& part : split(s, ',')) v.push_back(static_cast<int>(parse_int(trim(part))));
    return v;
}

std::string arch_string(const ArchSpec& a)
{
    return std::to_string(a.m) + "," + std::to_string(a.w) + "," + std::to_string(a.L);
}

ArchSpec parse_arch(const std::string& s, int p)
{
    const auto v = split_ints(s);
    if (v.size() != 3 || v[0] < 1 || v[1] < 1 || v[2] < 1) {
        throw ParseError("architecture must be three positive integers m,w,L: '" + s + "'");
    }
    return {v[0], v[1], v[2], p};
}

bool parse_bool(const std::string& s)
{
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ParseError("expected true/false, got '" + s + "'");
}

} // namespace

KeyValues ExperimentConfig::to_key_values() const
{
    KeyValues kv;
    kv["seed"] = std::to_string(seed);
    kv["restarts"] = std::to_string(restarts);
    kv["optimizer"] = optimizer == OptimizerKind::lbfgs ? "lbfgs" : "adam";
    kv["fig1.k"] = join_ints(fig1_k);
    kv["fig1.m"] = join_ints(fig1_m);
    kv["levels"] = std::to_string(levels);
    kv["bench.k"] = join_ints(bench_k);
    kv["bench.initial"] = arch_string(bench_initial);
    kv["bench.max_iterations"] = std::to_string(bench_max_iterations);
    kv["bench.depth_increment"] = std::to_string(bench_depth_increment);
    kv["bench.n_train"] = std::to_string(bench_train);
    kv["bench.n_test"] = std::to_string(bench_test);
    kv["bench.train_seed"] = std::to_string(bench_train_seed);
    kv["bench.test_seed"] = std::to_string(bench_test_seed);
    kv["fhn.level"] = std::to_string(fhn.level);
    kv["fhn.dt"] = format_double(fhn.dt);
    kv["fhn.final_time"] = format_double(fhn.final_time);
    kv["fhn.lumped_mass"] = fhn.lumped_mass ? "true" : "false";
    for (std::size_t i = 0; i < fhn_initial.size(); ++i) kv["fhn.guess" + std::to_string(i + 1)] = arch_string(fhn_initial[i]);
    kv["fhn.depth_increment"] = std::to_string(fhn_depth_increment);
    kv["fhn.max_iterations"] = std::to_string(fhn_max_iterations);
    kv["validate.max_k"] = std::to_string(validate_max_k);
    kv["validate.max_m"] = std::to_string(validate_max_m);
    kv["validate.samples"] = std::to_string(validate_samples);
    return kv;
}

void ExperimentConfig::apply(const KeyValues& kv)
{
    std::vector<std::pair<int, ArchSpec>> guesses;
    for (const auto& [key, value] : kv) {
        try {
            if (key == "seed") seed = static_cast<std::uint64_t>(parse_int(value));
            else if (key == "restarts") restarts = static_cast<int>(parse_int(value));
            else if (key == "max_iterations") {
                // The per-problem keys win regardless of map order.
                const int n = static_cast<int>(parse_int(value));
                if (!kv.count("bench.max_iterations")) bench_max_iterations = n;
                if (!kv.count("fhn.max_iterations")) fhn_max_iterations = n;
            }
            else if (key == "bench.max_iterations") bench_max_iterations = static_cast<int>(parse_int(value));
            else if (key == "fhn.max_iterations") fhn_max_iterations = static_cast<int>(parse_int(value));
            else if (key == "optimizer") {
                if (value == "lbfgs") optimizer = OptimizerKind::lbfgs;
                else if (value == "adam") optimizer = OptimizerKind::adam;
                else throw ParseError("optimizer must be lbfgs or adam");
            }
            else if (key == "fig1.k") fig1_k = split_ints(value);
            else if (key == "fig1.m") fig1_m = split_ints(value);
            else if (key == "levels") levels = static_cast<int>(parse_int(value));
            else if (key == "bench.k") bench_k = split_ints(value);
            else if (key == "bench.initial") bench_initial = parse_arch(value, 3);
            else if (key == "bench.depth_increment") bench_depth_increment = static_cast<int>(parse_int(value));
            else if (key == "bench.n_train") bench_train = static_cast<std::size_t>(parse_int(value));
            else if (key == "bench.n_test") bench_test = static_cast<std::size_t>(parse_int(value));
            else if (key == "bench.train_seed") bench_train_seed = static_cast<std::uint64_t>(parse_int(value));
            else if (key == "bench.test_seed") bench_test_seed = static_cast<std::uint64_t>(parse_int(value));
            else if (key == "fhn.level") fhn.level = static_cast<int>(parse_int(value));
            else if (key == "fhn.dt") fhn.dt = parse_double(value);
            else if (key == "fhn.final_time") fhn.final_time = parse_double(value);
            else if (key == "fhn.lumped_mass") fhn.lumped_mass = parse_bool(value);
            else if (key.rfind("fhn.guess", 0) == 0) {
                guesses.emplace_back(static_cast<int>(parse_int(key.substr(9))), parse_arch(value, 2));
            }
            else if (key == "fhn.depth_increment") fhn_depth_increment = static_cast<int>(parse_int(value));
            else if (key == "validate.max_k") validate_max_k = static_cast<int>(parse_int(value));
            else if (key == "validate.max_m") validate_max_m = static_cast<int>(parse_int(value));
            else if (key == "validate.samples") validate_samples = static_cast<int>(parse_int(value));
            else throw ParseError("unknown key");
        } catch (const ParseError& e) {
            throw ParseError("config key '" + key + "': " + e.what());
        } catch (const std::exception& e) {
            throw ParseError("config key '" + key + "': " + e.what());
        }
    }
    if (!guesses.empty()) {
        std::sort(guesses.begin(), guesses.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        fhn_initial.clear();
        for (auto& g : guesses) fhn_initial.push_back(g.second);
    }
    if (restarts < 1) throw ParseError("config: restarts must be >= 1");
    if (levels < 1) throw ParseError("config: levels must be >= 1");
}

TrainConfig train_config(const ExperimentConfig& cfg, int max_iterations)
{
    TrainConfig t;
    t.optimizer = cfg.optimizer;
    t.max_iterations = max_iterations;
    t.restarts = cfg.restarts;
    t.seed = cfg.seed;
    return t;
}

namespace {

KeyValues scaling_manifest(const ExperimentConfig& cfg, const std::string& name, const std::vector<ScalingRow>& rows)
{
    KeyValues kv;
    for (const auto& [k, v] : cfg.to_key_values()) kv["config." + k] = v;
    kv["run"] = name;
    kv["version"] = version_tag;
    kv["input_scaling"] = "inputs mapped affinely from the parameter box onto [0,1]^p";
    kv["selection"] = "lowest final training loss among non-diverged restarts";
    for (const auto& r : rows) {
        const std::string p = "level." + std::to_string(r.level) + ".";
        kv[p + "m"] = std::to_string(r.m);
        kv[p + "w"] = std::to_string(r.w);
        kv[p + "L"] = std::to_string(r.L);
        kv[p + "active_weights"] = std::to_string(r.active_weights);
        kv[p + "E"] = format_double(r.E);
        kv[p + "train_loss"] = format_double(r.train_loss);
        kv[p + "seed"] = std::to_string(r.seed);
        kv[p + "wall_s"] = format_double(r.wall_s);
        kv[p + "member_losses"] = join_doubles(r.member_losses);
        std::string div;
        for (std::size_t i = 0; i < r.member_diverged.size(); ++i) div += (i ? "," : "") + std::string(r.member_diverged[i] ? "1" : "0");
        kv[p + "member_diverged"] = div;
        kv[p + "loss_trace_tail"] = join_doubles(r.trace_tail);
    }
    return kv;
}

} // namespace

std::vector<LevelReport> run_scaling_benchmark(const ExperimentConfig& cfg)
{
    std::vector<LevelReport> out;
    for (int k : cfg.bench_k) {
        Dataset train = benchmark_dataset(cfg.bench_train, k, cfg.bench_train_seed, "train");
        Dataset test = benchmark_dataset(cfg.bench_test, k, cfg.bench_test_seed, "test");
        normalize_inputs(train, benchmark_box());
        normalize_inputs(test, benchmark_box());
        ArchSpec a = cfg.bench_initial;
        a.p = 3;
        a.level = k;
        auto rows = run_scaling(a, cfg.levels, 3, 2.0, cfg.bench_depth_increment, train, test, train_config(cfg, cfg.bench_max_iterations));
        const std::string name = "bench_k" + std::to_string(k);
        KeyValues kv = scaling_manifest(cfg, name, rows);
        kv["problem"] = "benchmark";
        kv["grid_level"] = std::to_string(k);
        kv["smoothness"] = "s=3,r=2,p=3";
        out.push_back({name, std::move(rows), std::move(kv)});
    }
    return out;
}

std::vector<LevelReport> run_scaling_fhn(const ExperimentConfig& cfg)
{
    FHNDatasets ds = fhn_dataset(cfg.fhn);
    const Box box{{fhn_mu_min, 0.0}, {fhn_mu_max, cfg.fhn.final_time}};
    normalize_inputs(ds.train, box);
    normalize_inputs(ds.test, box);
    std::vector<LevelReport> out;
    for (std::size_t g = 0; g < cfg.fhn_initial.size(); ++g) {
        ArchSpec a = cfg.fhn_initial[g];
        a.p = 2;
        a.level = cfg.fhn.level;
        auto rows = run_scaling(a, cfg.levels, 1, std::numeric_limits<double>::infinity(), cfg.fhn_depth_increment,
                                ds.train, ds.test, train_config(cfg, cfg.fhn_max_iterations));
        const std::string name = "fhn_guess" + std::to_string(g + 1);
        KeyValues kv = scaling_manifest(cfg, name, rows);
        kv["problem"] = "fitzhugh_nagumo";
        kv["grid_level"] = std::to_string(cfg.fhn.level);
        kv["smoothness"] = "s=1,r=inf (C(r) assumed bounded in r)";
        kv["n_train"] = std::to_string(ds.train.size());
        kv["n_test"] = std::to_string(ds.test.size());
        out.push_back({name, std::move(rows), std::move(kv)});
    }
    return out;
}

void write_reports(const std::vector<LevelReport>& reports, const std::string& dir, const std::string& title, bool plot)
{
    std::filesystem::create_directories(dir);
    SvgPlot svg{title, "active weights", "E", {}, {}};
    for (const auto& r : reports) {
        std::ofstream csv(dir + "/" + r.name + ".csv");
        write_scaling_csv(csv, r.rows);
        std::ofstream man(dir + "/" + r.name + ".manifest");
        write_key_values(man, r.manifest);
        SvgSeries s{r.name, {}, {}};
        for (const auto& row : r.rows) {
            s.x.push_back(static_cast<double>(row.active_weights));
            s.y.push_back(row.E);
        }
        svg.series.push_back(std::move(s));
    }
    if (plot && !svg.series.empty()) emit_svg(svg, dir + "/" + title + ".svg");
}

} // namespace specnet
