#include "specnet/problems.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "specnet/kv.hpp"

namespace specnet {

bool Box::contains(std::span<const double> mu) const
{
    if (mu.size() != lo.size()) return false;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (!(mu[i] >= lo[i] && mu[i] <= hi[i])) return false;
    }
    return true;
}

Box benchmark_box()
{
    return {{0.0, 0.0, 1.0}, {1.0, 1.0, 2.0}};
}

std::vector<double> benchmark_eval(std::span<const double> mu, const DyadicGrid& grid, bool allow_outside)
{
    if (mu.size() != 3) throw std::invalid_argument("benchmark_eval: expected 3 parameters");
    if (!allow_outside && !benchmark_box().contains(mu)) {
        throw std::domain_error("benchmark_eval: parameter outside [0,1]x[0,1]x[1,2]");
    }
    std::vector<double> u(grid.nodes());
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double x = grid.node(j);
        const double r = std::abs(x - mu[0]);
        u[j] = mu[2] * r * r * r * std::exp(-mu[1] * x);
    }
    return u;
}

std::vector<std::vector<double>> sample_parameters(const Box& box, std::size_t n, SamplingScheme scheme,
                                                   std::uint64_t seed)
{
    if (n == 0) throw std::invalid_argument("sample_parameters: n must be >= 1");
    if (box.lo.size() != box.hi.size() || box.lo.empty()) throw std::invalid_argument("sample_parameters: bad box");
    std::vector<std::vector<double>> out;
    if (scheme == SamplingScheme::uniform_random) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        out.assign(n, std::vector<double>(box.dim()));
        for (auto& mu : out) {
            for (std::size_t i = 0; i < box.dim(); ++i) mu[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * unit(rng);
        }
        return out;
    }
    if (box.dim() != 1) throw std::invalid_argument("sample_parameters: equispaced schemes need a 1-D box");
    const double a = box.lo[0];
    const double b = box.hi[0];
    auto node = [&](std::size_t i) {
        return n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    };
    if (scheme == SamplingScheme::equispaced) {
        for (std::size_t i = 0; i < n; ++i) out.push_back({node(i)});
    } else {
        for (std::size_t i = 0; i + 1 < n; ++i) out.push_back({0.5 * (node(i) + node(i + 1))});
    }
    return out;
}

Dataset benchmark_dataset(std::size_t n, int level, std::uint64_t seed, const std::string& split)
{
    const DyadicGrid grid(level);
    const auto mus = sample_parameters(benchmark_box(), n, SamplingScheme::uniform_random, seed);
    Dataset d;
    d.level = level;
    d.split = split;
    d.mu.resize(static_cast<Eigen::Index>(n), 3);
    d.u.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(grid.nodes()));
    for (std::size_t i = 0; i < n; ++i) {
        const auto u = benchmark_eval(mus[i], grid);
        for (std::size_t c = 0; c < 3; ++c) d.mu(i, c) = mus[i][c];
        for (std::size_t j = 0; j < u.size(); ++j) d.u(i, j) = u[j];
    }
    return d;
}

void write_dataset(std::ostream& os, const Dataset& d)
{
    const Eigen::Index p = d.mu.cols();
    const Eigen::Index nh = d.u.cols();
    for (Eigen::Index c = 0; c < p; ++c) os << (c ? "," : "") << "mu_" << c + 1;
    for (Eigen::Index j = 0; j < nh; ++j) os << (p + j ? "," : "") << "u_" << j + 1;
    os << '\n';
    for (Eigen::Index i = 0; i < d.mu.rows(); ++i) {
        for (Eigen::Index c = 0; c < p; ++c) os << (c ? "," : "") << format_double(d.mu(i, c));
        for (Eigen::Index j = 0; j < nh; ++j) os << (p + j ? "," : "") << format_double(d.u(i, j));
        os << '\n';
    }
}

void save_dataset(const std::string& path, const Dataset& d)
{
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_dataset: cannot open " + path);
    write_dataset(os, d);
}

namespace {

std::vector<std::string> split_columns(const std::string& line)
{
    auto cols = split(line, ',');
    for (auto& c : cols) c = trim(c);
    return cols;
}

} // namespace

Dataset read_dataset(std::istream& is, const std::string& split)
{
    std::string line;
    if (!std::getline(is, line)) throw ParseError("dataset line 1: missing header");
    const auto header = split_columns(line);
    std::size_t p = 0;
    while (p < header.size() && header[p] == "mu_" + std::to_string(p + 1)) ++p;
    for (std::size_t j = p; j < header.size(); ++j) {
        if (header[j] != "u_" + std::to_string(j - p + 1)) {
            throw ParseError("dataset line 1: unexpected column '" + header[j] + "'");
        }
    }
    const std::size_t nh = header.size() - p;
    int level = 0;
    while (level < 30 && (std::size_t{1} << level) + 1 < nh) ++level;
    if (level < 1 || (std::size_t{1} << level) + 1 != nh) {
        throw ParseError("dataset line 1: " + std::to_string(nh) + " nodal columns is not 2^k+1");
    }
    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cols = split_columns(line);
        if (cols.size() != header.size()) {
            throw ParseError("dataset line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                             " columns, got " + std::to_string(cols.size()));
        }
        std::vector<double> row(cols.size());
        for (std::size_t c = 0; c < cols.size(); ++c) {
            try {
                row[c] = parse_double(cols[c]);
            } catch (const std::exception& e) {
                throw ParseError("dataset line " + std::to_string(lineno) + ": " + e.what());
            }
        }
        rows.push_back(std::move(row));
    }
    Dataset d;
    d.level = level;
    d.split = split;
    d.mu.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
    d.u.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(nh));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < p; ++c) d.mu(i, c) = rows[i][c];
        for (std::size_t j = 0; j < nh; ++j) d.u(i, j) = rows[i][p + j];
    }
    return d;
}

Dataset load_dataset(const std::string& path, const std::string& split)
{
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_dataset: cannot open " + path);
    return read_dataset(is, split);
}

double fhn_forcing(const FHNConfig& cfg, double t)
{
    return cfg.forcing_amplitude * t * t * t * std::exp(-cfg.forcing_rate * t);
}

namespace {

struct Tridiagonal {
    std::vector<double> lower, diag, upper; // lower[0] and upper[n-1] unused

    std::vector<double> multiply(const std::vector<double>& x) const
    {
        const std::size_t n = diag.size();
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double v = diag[i] * x[i];
            if (i > 0) v += lower[i] * x[i - 1];
            if (i + 1 < n) v += upper[i] * x[i + 1];
            y[i] = v;
        }
        return y;
    }
};

// Thomas algorithm with the forward sweep done once.
class ThomasSolver {
public:
    explicit ThomasSolver(const Tridiagonal& a) : a_(a), cprime_(a.diag.size()), denom_(a.diag.size())
    {
        const std::size_t n = a.diag.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double d = a.diag[i] - (i > 0 ? a.lower[i] * cprime_[i - 1] : 0.0);
            if (d == 0.0 || !std::isfinite(d)) throw std::runtime_error("fhn_solve: singular tridiagonal system");
            denom_[i] = d;
            cprime_[i] = i + 1 < n ? a.upper[i] / d : 0.0;
        }
    }

    void solve(std::vector<double>& rhs) const
    {
        const std::size_t n = rhs.size();
        for (std::size_t i = 0; i < n; ++i) {
            rhs[i] = (rhs[i] - (i > 0 ? a_.lower[i] * rhs[i - 1] : 0.0)) / denom_[i];
        }
        for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= cprime_[i] * rhs[i + 1];
    }

private:
    Tridiagonal a_;
    std::vector<double> cprime_, denom_;
};

Tridiagonal fe_mass(std::size_t n, double h, bool lumped)
{
    Tridiagonal m{std::vector<double>(n, h / 6.0), std::vector<double>(n, 4.0 * h / 6.0),
                  std::vector<double>(n, h / 6.0)};
    m.diag.front() = m.diag.back() = 2.0 * h / 6.0;
    if (lumped) {
        for (std::size_t i = 0; i < n; ++i) {
            m.diag[i] = (i == 0 || i + 1 == n) ? 0.5 * h : h;
            m.lower[i] = m.upper[i] = 0.0;
        }
    }
    return m;
}

Tridiagonal fe_stiffness(std::size_t n, double h)
{
    Tridiagonal k{std::vector<double>(n, -1.0 / h), std::vector<double>(n, 2.0 / h), std::vector<double>(n, -1.0 / h)};
    k.diag.front() = k.diag.back() = 1.0 / h;
    return k;
}

} // namespace

FHNTrajectory fhn_solve(double mu, const FHNConfig& cfg)
{
    if (!(mu > 0.0)) throw std::invalid_argument("fhn_solve: mu must be positive");
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("fhn_solve: dt must be positive");
    const double ratio = cfg.final_time / cfg.dt;
    const auto steps = static_cast<std::size_t>(std::llround(ratio));
    if (std::abs(ratio - static_cast<double>(steps)) > 1e-9 * ratio) {
        throw std::invalid_argument("fhn_solve: final_time / dt must be an integer");
    }
    const DyadicGrid grid(cfg.level);
    const std::size_t n = grid.nodes();
    const double h = grid.step();

    const Tridiagonal mass = fe_mass(n, h, cfg.lumped_mass);
    const Tridiagonal stiff = fe_stiffness(n, h);
    Tridiagonal lhs = mass;
    for (std::size_t i = 0; i < n; ++i) {
        lhs.lower[i] = mu / cfg.dt * mass.lower[i] + mu * mu * stiff.lower[i];
        lhs.diag[i] = mu / cfg.dt * mass.diag[i] + mu * mu * stiff.diag[i];
        lhs.upper[i] = mu / cfg.dt * mass.upper[i] + mu * mu * stiff.upper[i];
    }
    const ThomasSolver solver(lhs);

    FHNTrajectory tr;
    tr.t.reserve(steps + 1);
    tr.u.reserve(steps + 1);
    tr.w.reserve(steps + 1);
    tr.t.push_back(0.0);
    tr.u.emplace_back(n, 0.0);
    tr.w.emplace_back(n, 0.0);
    std::vector<double> work(n);
    for (std::size_t step = 1; step <= steps; ++step) {
        const double t = static_cast<double>(step) * cfg.dt;
        const auto& u = tr.u.back();
        const auto& w = tr.w.back();
        for (std::size_t i = 0; i < n; ++i) {
            const double r = u[i] * (u[i] - 0.1) * (u[i] - 1.0);
            work[i] = mu / cfg.dt * u[i] - r - w[i];
        }
        std::vector<double> rhs = mass.multiply(work);
        rhs[0] += mu * mu * fhn_forcing(cfg, t);
        solver.solve(rhs);
        std::vector<double> wn(n);
        double peak = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            wn[i] = (w[i] + 0.5 * cfg.dt * rhs[i]) / (1.0 + 2.0 * cfg.dt);
            peak = std::max(peak, std::abs(rhs[i]));
        }
        if (!(peak <= cfg.blowup)) {
            std::ostringstream msg;
            msg << "fhn_solve: |u| = " << peak << " exceeds " << cfg.blowup << " at t = " << t << " (mu = " << mu << ")";
            throw std::runtime_error(msg.str());
        }
        tr.t.push_back(t);
        tr.u.push_back(std::move(rhs));
        tr.w.push_back(std::move(wn));
    }
    return tr;
}

std::vector<std::size_t> snapshot_indices(std::size_t steps, std::size_t count)
{
    if (count == 0) return {};
    if (count == 1) return {0};
    std::vector<std::size_t> idx(count);
    for (std::size_t i = 0; i < count; ++i) {
        idx[i] = static_cast<std::size_t>(
            std::llround(static_cast<double>(steps) * static_cast<double>(i) / static_cast<double>(count - 1)));
    }
    return idx;
}

namespace {

Dataset fhn_split(const FHNConfig& cfg, const std::vector<std::vector<double>>& mus, std::size_t n_t,
                  const std::string& split)
{
    const std::size_t nh = DyadicGrid(cfg.level).nodes();
    std::vector<FHNTrajectory> runs(mus.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < mus.size(); ++i) runs[i] = fhn_solve(mus[i][0], cfg);

    Dataset d;
    d.level = cfg.level;
    d.split = split;
    d.mu.resize(static_cast<Eigen::Index>(mus.size() * n_t), 2);
    d.u.resize(static_cast<Eigen::Index>(mus.size() * n_t), static_cast<Eigen::Index>(nh));
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < mus.size(); ++i) {
        const auto idx = snapshot_indices(runs[i].t.size() - 1, n_t);
        for (std::size_t s : idx) {
            d.mu(row, 0) = mus[i][0];
            d.mu(row, 1) = runs[i].t[s];
            for (std::size_t j = 0; j < nh; ++j) d.u(row, static_cast<Eigen::Index>(j)) = runs[i].u[s][j];
            ++row;
        }
    }
    return d;
}

} // namespace

FHNDatasets fhn_dataset(const FHNConfig& cfg, std::size_t n_mu, std::size_t n_t)
{
    const Box box{{fhn_mu_min}, {fhn_mu_max}};
    return {fhn_split(cfg, sample_parameters(box, n_mu, SamplingScheme::equispaced), n_t, "train"),
            fhn_split(cfg, sample_parameters(box, n_mu, SamplingScheme::midpoints), n_t, "test")};
}

double max_slope(std::span<const double> u, double h)
{
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < u.size(); ++j) s = std::max(s, std::abs(u[j + 1] - u[j]) / h);
    return s;
}

void write_trajectory(std::ostream& os, const std::vector<double>& t, const std::vector<std::vector<double>>& field)
{
    if (t.size() != field.size()) throw std::invalid_argument("write_trajectory: time and field sizes differ");
    os << 't';
    const std::size_t nh = field.empty() ? 0 : field.front().size();
    for (std::size_t j = 0; j < nh; ++j) os << ",x_" << j + 1;
    os << '\n';
    for (std::size_t n = 0; n < t.size(); ++n) {
        os << format_double(t[n]);
        for (double v : field[n]) os << ',' << format_double(v);
        os << '\n';
    }
}

} // namespace specnet
