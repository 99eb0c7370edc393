#include <doctest.h>

#include <cmath>
#include <sstream>

#include "specnet/kv.hpp"
#include "specnet/problems.hpp"

using namespace specnet;

TEST_CASE("benchmark solution values")
{
    const DyadicGrid g(1); // nodes 0, 0.5, 1
    const double a[3] = {0, 0, 1};
    CHECK(benchmark_eval(a, g)[1] == doctest::Approx(0.125).epsilon(1e-15));
    const double b[3] = {0.5, 0, 2};
    CHECK(benchmark_eval(b, g)[0] == doctest::Approx(0.25).epsilon(1e-15));
    const double c[3] = {0.5, 1, 1};
    CHECK(benchmark_eval(c, g)[2] == doctest::Approx(0.125 * std::exp(-1.0)).epsilon(1e-15));
    CHECK(std::abs(benchmark_eval(c, g)[2] - 0.0459849) <= 1e-7);

    const double out[3] = {0.5, 0, 3};
    CHECK_THROWS_AS(benchmark_eval(out, g), std::domain_error);
    CHECK_NOTHROW(benchmark_eval(out, g, true));
}

TEST_CASE("parameter sampling")
{
    const Box unit{{0.0}, {1.0}};
    const auto e = sample_parameters(unit, 3, SamplingScheme::equispaced);
    REQUIRE(e.size() == 3);
    CHECK(e[0][0] == 0.0);
    CHECK(e[1][0] == 0.5);
    CHECK(e[2][0] == 1.0);
    const auto m = sample_parameters(unit, 3, SamplingScheme::midpoints);
    REQUIRE(m.size() == 2);
    CHECK(m[0][0] == 0.25);
    CHECK(m[1][0] == 0.75);

    const Box box = benchmark_box();
    const auto r1 = sample_parameters(box, 50, SamplingScheme::uniform_random, 3);
    const auto r2 = sample_parameters(box, 50, SamplingScheme::uniform_random, 3);
    const auto r3 = sample_parameters(box, 50, SamplingScheme::uniform_random, 4);
    CHECK(r1 == r2);
    CHECK(r1 != r3);
    for (const auto& mu : r1) CHECK(box.contains(mu));
    CHECK_THROWS(sample_parameters(box, 3, SamplingScheme::equispaced));
}

TEST_CASE("dataset text round trip")
{
    Dataset d = benchmark_dataset(7, 3, 11, "train");
    REQUIRE(d.size() == 7);
    REQUIRE(d.u.cols() == 9);
    std::stringstream ss;
    write_dataset(ss, d);
    const Dataset r = read_dataset(ss);
    CHECK(r.level == 3);
    CHECK(r.mu == d.mu);
    CHECK(r.u == d.u);

    Dataset empty = d;
    empty.mu.resize(0, 3);
    empty.u.resize(0, 9);
    std::stringstream es;
    write_dataset(es, empty);
    std::string line;
    int lines = 0;
    while (std::getline(es, line)) ++lines;
    CHECK(lines == 1);
    std::stringstream es2;
    write_dataset(es2, empty);
    const Dataset re = read_dataset(es2);
    CHECK(re.size() == 0);
}

TEST_CASE("malformed dataset rows name the line")
{
    std::stringstream ss;
    ss << "mu_1,u_1,u_2,u_3\n0.1,1,2,3\n0.2,1,2\n";
    try {
        read_dataset(ss);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("FitzHugh-Nagumo forcing and fixed point")
{
    FHNConfig cfg;
    CHECK(fhn_forcing(cfg, 0.2) == doctest::Approx(400 * std::exp(-3.0)).epsilon(1e-14));
    CHECK(fhn_forcing(cfg, 0.0) == 0.0);

    cfg.forcing_amplitude = 0.0;
    cfg.final_time = 0.1;
    const FHNTrajectory tr = fhn_solve(0.02, cfg);
    CHECK(tr.t.size() == 21);
    for (const auto& u : tr.u) {
        for (double v : u) CHECK(v == 0.0);
    }
    for (const auto& w : tr.w) {
        for (double v : w) CHECK(v == 0.0);
    }
}

TEST_CASE("FitzHugh-Nagumo fronts sharpen as mu decreases")
{
    FHNConfig cfg;
    cfg.level = 7;
    const double h = DyadicGrid(cfg.level).step();
    const double s_small = max_slope(fhn_solve(0.01, cfg).u.back(), h);
    const double s_large = max_slope(fhn_solve(0.04, cfg).u.back(), h);
    CHECK(s_small > s_large);
}

TEST_CASE("snapshot indices")
{
    CHECK(snapshot_indices(400, 5) == std::vector<std::size_t>{0, 100, 200, 300, 400});
    CHECK(snapshot_indices(10, 1) == std::vector<std::size_t>{0});
}

TEST_CASE("key value parsing")
{
    std::stringstream ss("# comment\na = 1\nb=x,y\n");
    const KeyValues kv = read_key_values(ss);
    CHECK(kv.at("a") == "1");
    CHECK(kv.at("b") == "x,y");
    std::stringstream bad("a=1\nnonsense\n");
    CHECK_THROWS_AS(read_key_values(bad), ParseError);
    std::stringstream dup("a=1\na=2\n");
    CHECK_THROWS_AS(read_key_values(dup), ParseError);
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02e23}) CHECK(parse_double(format_double(v)) == v);
}
