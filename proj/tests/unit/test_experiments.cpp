#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "specnet/experiments.hpp"

using namespace specnet;

TEST_CASE("architecture scaling factors")
{
    CHECK(channel_factor(3) == doctest::Approx(std::pow(2.0, 0.4)).epsilon(1e-14));
    CHECK(width_factor(3, 2.0, 3) == doctest::Approx(std::pow(2.0, 1.4)).epsilon(1e-14));
    CHECK(std::abs(channel_factor(3) - 1.32) <= 0.005);
    CHECK(std::abs(width_factor(3, 2.0, 3) - 2.64) <= 0.005);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(channel_factor(1) == 4.0);
    CHECK(width_factor(1, inf, 2) == 4.0);

    const ArchSpec a = scale_architecture(ArchSpec{1, 1, 1, 2}, 1, inf, 1);
    CHECK(a.m == 4);
    CHECK(a.w == 4);
    CHECK(a.L == 2);
    const ArchSpec b = scale_architecture(ArchSpec{5, 4, 3, 3}, 3, 2.0, 2);
    CHECK(b.m == 7);
    CHECK(b.w == 11);
    CHECK(b.L == 5);
    const ArchSpec c = scale_architecture(ExperimentConfig{}.bench_initial, 3, 2.0, 2);
    CHECK(c.m == 7);
    CHECK(c.w == 11);
    CHECK(c.L == 5);
    const ArchSpec literal = scale_architecture(ArchSpec{5, 3, 4, 3}, 3, 2.0, 2);
    CHECK(literal.w == 8);
    CHECK(literal.L == 6);
}

TEST_CASE("mode bound from a target accuracy")
{
    CHECK(choose_m(0.5, 1, 1.0, 1.0) == 16);
    CHECK(choose_m(0.5, 3, 1.0, 1.0) == 2);
}

TEST_CASE("log-log slope")
{
    CHECK(loglog_slope({1, 2, 4, 8}, {1, 0.5, 0.25, 0.125}) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(loglog_slope({4, 16, 64}, {3, 1.5, 0.75}) == doctest::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("svg output")
{
    SvgPlot one{"t", "x", "y", {{"a", {2.0}, {3.0}}}, {}};
    const std::string s1 = render_svg(one);
    CHECK(s1.rfind("<svg", 0) == 0);
    CHECK(s1.find("</svg>") != std::string::npos);
    std::size_t circles = 0;
    for (std::size_t p = s1.find("<circle"); p != std::string::npos; p = s1.find("<circle", p + 1)) ++circles;
    CHECK(circles == 1);

    SvgPlot two{"t", "x", "y", {{"a", {1, 10}, {1, 0.1}}, {"b", {1, 10}, {2, 0.3}}}, {{-0.5, 1, 1, "guide"}}};
    const std::string s2 = render_svg(two);
    std::size_t lines = 0;
    for (std::size_t p = s2.find("<polyline"); p != std::string::npos; p = s2.find("<polyline", p + 1)) ++lines;
    CHECK(lines == 2);
    CHECK(s2.find(">a</text>") != std::string::npos);
    CHECK(s2.find(">b</text>") != std::string::npos);
    CHECK(render_svg(two) == s2);

    CHECK_THROWS_AS(render_svg(SvgPlot{}), std::invalid_argument);
    CHECK_THROWS_AS(render_svg(SvgPlot{"", "", "", {{"e", {}, {}}}, {}}), std::invalid_argument);
    CHECK_THROWS_AS(render_svg(SvgPlot{"", "", "", {{"n", {1.0}, {0.0}}}, {}}), std::invalid_argument);
}

TEST_CASE("experiment configuration")
{
    ExperimentConfig cfg;
    cfg.apply({{"seed", "7"}, {"fig1.m", "4,8"}, {"bench.initial", "6,5,2"}, {"fhn.dt", "0.001"}});
    CHECK(cfg.seed == 7);
    CHECK(cfg.fig1_m == std::vector<int>{4, 8});
    CHECK(cfg.bench_initial.m == 6);
    CHECK(cfg.bench_initial.w == 5);
    CHECK(cfg.bench_initial.L == 2);
    CHECK(cfg.fhn.dt == 0.001);
    cfg.apply({{"max_iterations", "50"}, {"fhn.max_iterations", "20"}});
    CHECK(cfg.bench_max_iterations == 50);
    CHECK(cfg.fhn_max_iterations == 20);
    CHECK_THROWS_AS(cfg.apply({{"no.such.key", "1"}}), ParseError);
    CHECK_THROWS_AS(cfg.apply({{"restarts", "many"}}), ParseError);

    ExperimentConfig back;
    back.apply(cfg.to_key_values());
    CHECK(back.to_key_values() == cfg.to_key_values());
}

TEST_CASE("truncation error through the network matches the direct series")
{
    const SobolevSignal f = pow_3_2_signal();
    const int k = 5, m = 8;
    const FourierCoeffs Z = operator_T(f, m);
    const double err = reconstruction_error(f, Z, k);
    const DyadicGrid g(k);
    double direct = 0.0;
    for (std::size_t j = 0; j < g.nodes(); ++j) {
        const double y = (g.node(j) + 1) / 2;
        direct = std::max(direct, std::abs(f(g.node(j)) - truncated_series_eval(Z, y).real()));
    }
    CHECK(std::abs(err - direct) <= 1e-12);
}

TEST_CASE("scaling csv layout")
{
    std::ostringstream os;
    write_scaling_csv(os, {ScalingRow{1, 5, 4, 3, 120, 0.25, 2, 1.5}});
    const std::string s = os.str();
    CHECK(s.rfind("level,m,w,L,active_weights,E,seed,wall_s\n", 0) == 0);
    CHECK(s.find("\n1,5,4,3,120,") != std::string::npos);
}
