// Command line front end for the experiments.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "specnet/experiments.hpp"

using namespace specnet;

namespace {

struct Common {
    std::string config;
    std::string out = "out";
    bool plot = false;
    std::vector<int> k;
    std::vector<int> m_list;
    int levels = 0;
    long long seed = -1;
    int restarts = 0;
    int max_iterations = 0;
};

void add_common(CLI::App* app, Common& c, bool with_k, bool with_m, bool with_levels, bool with_training)
{
    app->add_option("--config", c.config, "key=value file overriding the defaults");
    app->add_option("--out", c.out, "output directory");
    app->add_flag("--plot", c.plot, "also write SVG plots");
    app->add_option("--seed", c.seed, "base seed");
    if (with_k) app->add_option("--k", c.k, "grid level(s)")->delimiter(',');
    if (with_m) app->add_option("--m-list", c.m_list, "mode bounds")->delimiter(',');
    if (with_levels) app->add_option("--levels", c.levels, "architecture levels");
    if (with_training) {
        app->add_option("--restarts", c.restarts, "ensemble size");
        app->add_option("--max-iterations", c.max_iterations, "optimizer iterations per restart");
    }
}

ExperimentConfig load_config(const Common& c)
{
    ExperimentConfig cfg;
    if (!c.config.empty()) cfg.apply(read_key_values_file(c.config));
    if (c.seed >= 0) cfg.seed = static_cast<std::uint64_t>(c.seed);
    if (c.levels > 0) cfg.levels = c.levels;
    if (c.restarts > 0) cfg.restarts = c.restarts;
    if (c.max_iterations > 0) cfg.bench_max_iterations = cfg.fhn_max_iterations = c.max_iterations;
    return cfg;
}

void write_run_manifest(const ExperimentConfig& cfg, const std::string& dir, const std::string& name)
{
    std::filesystem::create_directories(dir);
    KeyValues kv;
    for (const auto& [k, v] : cfg.to_key_values()) kv["config." + k] = v;
    kv["run"] = name;
    kv["version"] = version_tag;
    std::ofstream os(dir + "/" + name + ".manifest");
    write_key_values(os, kv);
}

int report_checks(const std::vector<Check>& checks)
{
    int failed = 0;
    for (const auto& c : checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  " << c.detail << '\n';
        failed += !c.passed;
    }
    std::cout << checks.size() - failed << '/' << checks.size() << " checks passed\n";
    return failed == 0 ? 0 : 1;
}

int cmd_validate(const Common& c)
{
    ExperimentConfig cfg = load_config(c);
    if (!c.k.empty()) cfg.validate_max_k = *std::max_element(c.k.begin(), c.k.end());
    if (!c.m_list.empty()) cfg.validate_max_m = *std::max_element(c.m_list.begin(), c.m_list.end());
    write_run_manifest(cfg, c.out, "validate");
    return report_checks(run_validation(cfg, c.out, c.plot));
}

int cmd_fig1(const Common& c)
{
    ExperimentConfig cfg = load_config(c);
    if (!c.k.empty()) cfg.fig1_k = c.k;
    if (!c.m_list.empty()) cfg.fig1_m = c.m_list;
    std::filesystem::create_directories(c.out);
    write_run_manifest(cfg, c.out, "fig1");
    const std::vector<SobolevSignal> signals{abs_shift_signal(), pow_3_2_signal()};
    const Fig1Result res = run_fig1(signals, cfg.fig1_m, cfg.fig1_k);
    {
        std::ofstream os(c.out + "/fig1.csv");
        write_fig1_csv(os, res.rows);
    }
    SvgPlot svg{"truncation error", "m", "max error", {}, {}};
    for (const auto& f : signals) {
        for (int k : cfg.fig1_k) {
            SvgSeries s{f.name + " k=" + std::to_string(k), {}, {}};
            for (const auto& r : res.rows) {
                if (r.signal == f.name && r.k == k) {
                    s.x.push_back(r.m);
                    s.y.push_back(r.error);
                }
            }
            if (!s.x.empty()) {
                const double slope = s.x.size() > 1 ? loglog_slope(s.x, s.y) : 0.0;
                std::cout << f.name << " k=" << k << " fitted slope " << slope << '\n';
                svg.series.push_back(std::move(s));
            }
        }
    }
    for (const auto& [name, ne] : res.norms) {
        std::cout << name << " folded H^s norm " << ne.value << (ne.converged ? "" : " (not converged)") << '\n';
    }
    if (c.plot && !svg.series.empty()) {
        svg.guides.push_back({-0.5, svg.series.front().x.front(), svg.series.front().y.front(), "m^-1/2"});
        svg.guides.push_back({-1.5, svg.series.back().x.front(), svg.series.back().y.front(), "m^-3/2"});
        emit_svg(svg, c.out + "/fig1.svg");
    }
    return 0;
}

int check_ratios(const std::vector<LevelReport>& reports, double max_ratio)
{
    int failed = 0;
    for (const auto& r : reports) {
        std::cout << r.name << '\n';
        for (std::size_t i = 0; i < r.rows.size(); ++i) {
            const auto& row = r.rows[i];
            std::cout << "  level " << row.level << " (m,w,L)=(" << row.m << ',' << row.w << ',' << row.L
                      << ") weights " << row.active_weights << " E " << row.E;
            if (i > 0) {
                const double ratio = row.E / r.rows[i - 1].E;
                const bool ok = ratio <= max_ratio;
                failed += !ok;
                std::cout << " ratio " << ratio << (ok ? "" : " (above " + std::to_string(max_ratio) + ")");
            }
            std::cout << '\n';
        }
    }
    return failed == 0 ? 0 : 1;
}

int cmd_bench_scale(const Common& c)
{
    ExperimentConfig cfg = load_config(c);
    if (!c.k.empty()) cfg.bench_k = c.k;
    const auto reports = run_scaling_benchmark(cfg);
    write_reports(reports, c.out, "bench_scaling", c.plot);
    return check_ratios(reports, 0.75);
}

int cmd_fhn_scale(const Common& c)
{
    ExperimentConfig cfg = load_config(c);
    if (!c.k.empty()) cfg.fhn.level = c.k.front();
    const auto reports = run_scaling_fhn(cfg);
    write_reports(reports, c.out, "fhn_scaling", c.plot);
    return check_ratios(reports, 0.8);
}

int cmd_fhn_solve(const Common& c, double mu)
{
    ExperimentConfig cfg = load_config(c);
    if (!c.k.empty()) cfg.fhn.level = c.k.front();
    const FHNTrajectory tr = fhn_solve(mu, cfg.fhn);
    std::filesystem::create_directories(c.out);
    write_run_manifest(cfg, c.out, "fhn_solve");
    {
        std::ofstream os(c.out + "/fhn_u.csv");
        write_trajectory(os, tr.t, tr.u);
    }
    {
        std::ofstream os(c.out + "/fhn_w.csv");
        write_trajectory(os, tr.t, tr.w);
    }
    const double h = DyadicGrid(cfg.fhn.level).step();
    std::cout << "mu " << mu << " steps " << tr.t.size() - 1 << " max|u_x|(T) " << max_slope(tr.u.back(), h) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectral CNN operator learning experiments"};
    app.require_subcommand(1);

    Common validate, fig1, bench, fhn_scale, fhn_solve;
    double mu = 0.0275;
    auto* v = app.add_subcommand("validate", "property suite over the untrained components");
    add_common(v, validate, true, true, false, false);
    auto* f = app.add_subcommand("fig1", "truncation error versus m for the two test signals");
    add_common(f, fig1, true, true, false, false);
    auto* b = app.add_subcommand("bench-scale", "benchmark operator scaling study");
    add_common(b, bench, true, false, true, true);
    auto* fs = app.add_subcommand("fhn-scale", "FitzHugh-Nagumo scaling study");
    add_common(fs, fhn_scale, true, false, true, true);
    auto* fo = app.add_subcommand("fhn-solve", "solve and dump one FitzHugh-Nagumo trajectory");
    add_common(fo, fhn_solve, true, false, false, false);
    fo->add_option("--mu", mu, "parameter value")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);
    try {
        if (v->parsed()) return cmd_validate(validate);
        if (f->parsed()) return cmd_fig1(fig1);
        if (b->parsed()) return cmd_bench_scale(bench);
        if (fs->parsed()) return cmd_fhn_scale(fhn_scale);
        if (fo->parsed()) return cmd_fhn_solve(fhn_solve, mu);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
