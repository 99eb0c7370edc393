#pragma once

// Ground-truth generators: the analytic benchmark u(x) = mu3 |x - mu1|^3 e^{-mu2 x},
// the FitzHugh-Nagumo monodomain solver, parameter sampling and datasets.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "specnet/spectral.hpp"

namespace specnet {

struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const { return lo.size(); }
    bool contains(std::span<const double> mu) const;
};

/// [0,1] x [0,1] x [1,2].
Box benchmark_box();

/// Throws std::domain_error when mu lies outside benchmark_box() unless allow_outside.
std::vector<double> benchmark_eval(std::span<const double> mu, const DyadicGrid& grid, bool allow_outside = false);

enum class SamplingScheme { uniform_random, equispaced, midpoints };

/// Rows of the result are parameter vectors. `equispaced` and `midpoints`
/// need a one-dimensional box; `midpoints` returns the n-1 points between
/// n equispaced ones.
std::vector<std::vector<double>> sample_parameters(const Box& box, std::size_t n, SamplingScheme scheme,
                                                   std::uint64_t seed = 0);

struct Dataset {
    Eigen::MatrixXd mu; // N x p
    Eigen::MatrixXd u;  // N x N_h
    int level = 1;
    std::string split = "train";

    std::size_t size() const { return static_cast<std::size_t>(mu.rows()); }
    std::size_t inputs() const { return static_cast<std::size_t>(mu.cols()); }
};

/// n parameter draws from the benchmark box evaluated on the level-k grid.
Dataset benchmark_dataset(std::size_t n, int level, std::uint64_t seed, const std::string& split);

/// Header mu_1..mu_p,u_1..u_{N_h}; 17 significant digits.
void write_dataset(std::ostream& os, const Dataset& d);
void save_dataset(const std::string& path, const Dataset& d);
/// Throws ParseError naming the line on malformed input.
Dataset read_dataset(std::istream& is, const std::string& split = "train");
Dataset load_dataset(const std::string& path, const std::string& split = "train");

struct FHNConfig {
    double final_time = 2.0;
    double dt = 5e-3;
    int level = 8;
    /// Left boundary flux amplitude * t^3 e^{-rate t}.
    double forcing_amplitude = 50000.0;
    double forcing_rate = 15.0;
    bool lumped_mass = false;
    double blowup = 1e3;
};

double fhn_forcing(const FHNConfig& cfg, double t);

struct FHNTrajectory {
    std::vector<double> t;
    std::vector<std::vector<double>> u; // u[n] at t[n]
    std::vector<std::vector<double>> w;
};

/// Linear finite elements in space, semi-implicit Euler in time. Throws
/// std::runtime_error on a singular tridiagonal system or when |u| exceeds
/// cfg.blowup.
FHNTrajectory fhn_solve(double mu, const FHNConfig& cfg = {});

/// Parameter interval for the FitzHugh-Nagumo experiments.
inline constexpr double fhn_mu_min = 0.005;
inline constexpr double fhn_mu_max = 0.05;

/// Indices round(linspace(0, steps, count)).
std::vector<std::size_t> snapshot_indices(std::size_t steps, std::size_t count);

struct FHNDatasets {
    Dataset train;
    Dataset test;
};

/// Inputs (mu, t); train uses n_mu equispaced mu values, test their midpoints.
FHNDatasets fhn_dataset(const FHNConfig& cfg, std::size_t n_mu = 20, std::size_t n_t = 25);

/// max_j |(u_{j+1} - u_j) / h|.
double max_slope(std::span<const double> u, double h);

/// Columns t,x_1..x_{N_h}, one row per stored step.
void write_trajectory(std::ostream& os, const std::vector<double>& t, const std::vector<std::vector<double>>& field);

} // namespace specnet
