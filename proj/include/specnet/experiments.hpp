#pragma once

// Experiment drivers: architecture scaling, the truncation-error study, the
// benchmark and FitzHugh-Nagumo scaling runs, and their CSV/SVG/manifest output.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "specnet/kv.hpp"
#include "specnet/periodize.hpp"
#include "specnet/problems.hpp"
#include "specnet/trainer.hpp"

namespace specnet {

inline constexpr const char* version_tag = "specnet 1.0.0";

struct ArchSpec {
    int m = 1;
    int w = 1;
    int L = 1;
    int p = 1;
    int level = 5;
    double slope = 0.01;
    std::uint64_t seed = 0;
};

/// m -> ceil(2^{2/(2s-1)} m), w -> ceil(2^{p/(r+1) + 2/(2s-1)} w), L -> L + l.
/// r = infinity drops the p/(r+1) term.
ArchSpec scale_architecture(const ArchSpec& a, int s, double r, int l);
double channel_factor(int s);
double width_factor(int s, double r, int p);

/// ceil((eps/2)^{-2/(2s-1)} M c).
int choose_m(double eps, int s, double M, double c);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct Fig1Row {
    std::string signal;
    int s = 1;
    int k = 5;
    int m = 1;
    double error = 0.0;
};

struct Fig1Result {
    std::vector<Fig1Row> rows; // sorted by signal, k, m
    /// Per signal: H^s norm estimate of the folded signal and whether the
    /// refinement check passed.
    std::vector<std::pair<std::string, NormEstimate>> norms;
};

/// max_j |f(x_j) - Psi_j(T f)| evaluated through the constructed network.
double reconstruction_error(const SobolevSignal& f, const FourierCoeffs& Z, int k);

Fig1Result run_fig1(const std::vector<SobolevSignal>& signals, const std::vector<int>& m_list,
                    const std::vector<int>& k_list);
void write_fig1_csv(std::ostream& os, const std::vector<Fig1Row>& rows);

struct ScalingRow {
    int level = 1; // architecture level j
    int m = 1;
    int w = 1;
    int L = 1;
    std::size_t active_weights = 0;
    double E = 0.0;
    std::uint64_t seed = 0; // winning restart
    double wall_s = 0.0;
    double train_loss = 0.0;
    std::vector<double> member_losses;
    std::vector<bool> member_diverged;
    std::vector<double> trace_tail;
};

void write_scaling_csv(std::ostream& os, const std::vector<ScalingRow>& rows);

/// Nonzero dense parameters plus active weights of the frozen decoder.
std::size_t model_active_weights(const MLPParams& p, int level, int m);

/// Affine map of each input column from [lo, hi] onto [0, 1].
void normalize_inputs(Dataset& d, const Box& box);

/// Trains one ensemble per architecture level on fixed datasets.
std::vector<ScalingRow> run_scaling(const ArchSpec& initial, int levels, int s, double r, int depth_increment,
                                    const Dataset& train, const Dataset& test, const TrainConfig& cfg);

struct SvgSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct SvgGuide {
    double slope = -0.5;
    double x0 = 1.0; // the guide passes through (x0, y0)
    double y0 = 1.0;
    std::string label;
};

struct SvgPlot {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    std::vector<SvgSeries> series;
    std::vector<SvgGuide> guides;
};

/// Log-log plot. Throws std::invalid_argument for an empty plot or
/// non-positive coordinates.
std::string render_svg(const SvgPlot& plot);
void emit_svg(const SvgPlot& plot, const std::string& path);

struct ExperimentConfig {
    std::uint64_t seed = 0;
    int restarts = 5;
    /// Iterations per restart. The benchmark ladder keeps improving past 2000.
    int bench_max_iterations = 6000;
    int fhn_max_iterations = 2000;
    OptimizerKind optimizer = OptimizerKind::lbfgs;

    std::vector<int> fig1_k{5, 6, 7};
    std::vector<int> fig1_m{4, 8, 16, 32, 64, 128, 256, 512};

    int levels = 3;
    std::vector<int> bench_k{5, 6, 7};
    /// (m, w, L). The results table prints (5, 3, 4) with the w and L headers
    /// swapped; its later rows only follow the scaling rule from (5, 4, 3).
    ArchSpec bench_initial{5, 4, 3, 3};
    int bench_depth_increment = 2;
    std::size_t bench_train = 500;
    std::size_t bench_test = 500;
    std::uint64_t bench_train_seed = 1000;
    std::uint64_t bench_test_seed = 2000;

    FHNConfig fhn;
    std::vector<ArchSpec> fhn_initial{{1, 3, 3, 2}, {1, 2, 4, 2}};
    int fhn_depth_increment = 1;

    /// Exactness sweep of the validation suite.
    int validate_max_k = 10;
    int validate_max_m = 32;
    int validate_samples = 100;

    KeyValues to_key_values() const;
    /// Overrides the fields named in kv; unknown keys raise ParseError.
    /// `max_iterations` sets both per-problem budgets.
    void apply(const KeyValues& kv);
};

TrainConfig train_config(const ExperimentConfig& cfg, int max_iterations);

struct LevelReport {
    std::string name;
    std::vector<ScalingRow> rows;
    KeyValues manifest;
};

/// One report per grid level k in cfg.bench_k.
std::vector<LevelReport> run_scaling_benchmark(const ExperimentConfig& cfg);
/// One report per initial guess in cfg.fhn_initial.
std::vector<LevelReport> run_scaling_fhn(const ExperimentConfig& cfg);

/// Writes <name>.csv and <name>.manifest (and <name>.svg when plot) under dir.
void write_reports(const std::vector<LevelReport>& reports, const std::string& dir, const std::string& title, bool plot);

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Property suite over the untrained components. Writes deterministic CSVs
/// into dir and returns one entry per check.
std::vector<Check> run_validation(const ExperimentConfig& cfg, const std::string& dir, bool plot);

} // namespace specnet
