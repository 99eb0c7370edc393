#pragma once

// Trainable dense block: a leaky-ReLU MLP mapping parameters to the real
// embedding of 2m+1 Fourier coefficients, followed by a frozen linear decoder.
// Full-batch loss h/N sum_i sum_j |u_ij - (V mlp(mu_i))_j|^2, manual backprop,
// L-BFGS and Adam.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "specnet/network.hpp"
#include "specnet/problems.hpp"

namespace specnet {

struct MLPShape {
    int inputs = 1;
    int width = 1;
    int hidden_layers = 1;
    int outputs = 1;
    double slope = 0.01;

    std::size_t layer_count() const { return static_cast<std::size_t>(hidden_layers) + 1; }
    int layer_in(std::size_t l) const { return l == 0 ? inputs : width; }
    int layer_out(std::size_t l) const { return l + 1 == layer_count() ? outputs : width; }
    std::size_t parameter_count() const;
};

/// All weights and biases in one vector. Layer l stores W_l (out x in,
/// column-major) followed by b_l.
struct MLPParams {
    MLPShape shape;
    Eigen::VectorXd theta;

    Eigen::Map<const Eigen::MatrixXd> W(std::size_t l) const;
    Eigen::Map<const Eigen::VectorXd> b(std::size_t l) const;
    std::size_t offset(std::size_t l) const;
};

/// W ~ N(0, 2 / fan_in), b = 0.
MLPParams init_he(const MLPShape& shape, std::uint64_t seed);

/// The same MLP as a NetworkGraph of dense layers (input 1 x inputs).
NetworkGraph mlp_graph(const MLPParams& p);

/// V (N_h x (4m+2)) = materialized Psi preceded by real_to_embedded.
struct FrozenDecoder {
    Eigen::MatrixXd V;
    int level = 1;
    int modes = 1;

    static FrozenDecoder from_network(int level, int modes);
};

/// Columns are samples: mu is p x N, result is outputs x N.
Eigen::MatrixXd mlp_forward(const MLPParams& p, const Eigen::MatrixXd& mu);

/// N_h x N predictions for the rows of `mu` (N x p).
Eigen::MatrixXd model_forward(const MLPParams& p, const FrozenDecoder& dec, const Eigen::MatrixXd& mu);

double loss(const MLPParams& p, const FrozenDecoder& dec, const Dataset& data);
/// Loss and its gradient with respect to theta.
double loss_and_grad(const MLPParams& p, const FrozenDecoder& dec, const Dataset& data, Eigen::VectorXd& grad);
Eigen::VectorXd grad(const MLPParams& p, const FrozenDecoder& dec, const Dataset& data);

/// max_{i,j} |u_ij - prediction_ij|.
double test_error(const MLPParams& p, const FrozenDecoder& dec, const Dataset& data);

/// Value and gradient at x; the gradient is written into g.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& g)>;

enum class OptimizerKind { lbfgs, adam };

struct TrainConfig {
    OptimizerKind optimizer = OptimizerKind::lbfgs;
    int max_iterations = 2000;
    int history = 10;
    double c1 = 1e-4;
    double c2 = 0.9;
    int max_line_search = 25;
    double grad_tol = 1e-10;
    double learning_rate = 1e-3; // Adam
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int restarts = 5;
    std::uint64_t seed = 0;
};

struct TraceRow {
    int iteration = 0;
    double loss = 0.0;
    double grad_norm = 0.0;
};

struct OptimizeResult {
    Eigen::VectorXd x;
    double value = 0.0;
    std::vector<TraceRow> trace;
    int line_search_failures = 0;
    bool converged = false;
};

/// Two-loop recursion with a strong Wolfe line search. A failed search falls
/// back to a steepest-descent step and is counted in line_search_failures.
OptimizeResult optimize_lbfgs(Eigen::VectorXd x0, const Objective& f, const TrainConfig& cfg);
OptimizeResult optimize_adam(Eigen::VectorXd x0, const Objective& f, const TrainConfig& cfg);

struct TrainedModel {
    MLPParams params;
    OptimizeResult result;
    std::uint64_t seed = 0;
    bool diverged = false;
};

TrainedModel train_single(const MLPShape& shape, const FrozenDecoder& dec, const Dataset& data, const TrainConfig& cfg,
                          std::uint64_t seed);

struct EnsembleResult {
    std::vector<TrainedModel> members;
    std::size_t best = 0;

    const TrainedModel& winner() const { return members[best]; }
};

/// cfg.restarts models with seeds cfg.seed + r; the winner has the lowest final
/// training loss among members that did not diverge.
EnsembleResult train_ensemble(const MLPShape& shape, const FrozenDecoder& dec, const Dataset& data,
                              const TrainConfig& cfg);

/// iteration,loss,grad_norm
void write_trace(std::ostream& os, const std::vector<TraceRow>& trace);

} // namespace specnet
