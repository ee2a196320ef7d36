#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "netadapt/bridge.hpp"
#include "netadapt/kirchhoff.hpp"

using namespace netadapt;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_SUITE("limit-bridge") {
  TEST_CASE("sampling") {
    const auto line = GridSpec::unit(1, 4);
    const auto ones = sample_network_from_fields(make_field(line, [](int, double, double) { return 1.0; }, 1.0, false),
                                                 nullptr, line);
    for (const auto& e : ones.network.edges()) {
      CHECK(e.conductivity == 1.0);
      CHECK(e.length == 0.25);
    }
    const auto lin = sample_network_from_fields(make_field(line, [](int, double x, double) { return x; }, 1.0, false),
                                                nullptr, line);
    const std::vector<double> expected{0.125, 0.375, 0.625, 0.875};
    for (std::size_t e = 0; e < 4; ++e) CHECK(lin.network.edge(e).conductivity == doctest::Approx(expected[e]));

    const auto g = GridSpec::unit(2, 3);
    const auto sq = sample_network_from_fields(make_field(g, [](int, double, double) { return 1.0; }), nullptr, g);
    CHECK(sq.network.num_edges() == 2 * 3 * 4);
    CHECK(sq.network.num_vertices() == 16);
  }

  TEST_CASE("kirchhoff consistency") {
    // Constant c and linear p: exact at interior nodes.
    const auto exact = kirchhoff_consistency([](int, double, double) { return 3.0; },
                                             [](double x, double) { return 2 * x + 1; }, 1, {8, 16});
    for (const auto& r : exact.rows) CHECK(r.error < 1e-9);

    const auto t1 = kirchhoff_consistency([](int, double x, double) { return 2 + std::cos(2 * pi * x); },
                                          [](double x, double) { return std::sin(2 * pi * x); }, 1, {16, 32, 64});
    CHECK(t1.order >= 1.0);
    CHECK(t1.rows[1].error < t1.rows[0].error);
    CHECK(t1.rows[2].error < t1.rows[1].error);
    const auto t2 = kirchhoff_consistency(
        [](int k, double x, double y) { return k == 0 ? 2 + std::cos(2 * pi * x) : 2 + std::sin(2 * pi * y); },
        [](double x, double y) { return std::sin(2 * pi * x) * std::cos(2 * pi * y); }, 2, {16, 32, 64});
    CHECK(t2.order >= 1.0);
  }

  TEST_CASE("poisson convergence tables") {
    for (int dim : {1, 2}) {
      const auto t = poisson_convergence(dim, {8, 16, 32});
      CHECK(t.order >= 1.0);
      CHECK(t.rows[2].error < t.rows[1].error);
    }
  }

  TEST_CASE("energy riemann gap") {
    const EnergyParams p{1.5, 1.0, 0.5};
    const auto line = energy_riemann_gap([](int, double x, double) { return 1 + x * (1 - x); }, p, 1, {16, 32, 64});
    CHECK(line.order >= 1.0);
    // Constant field: the gap is the extra boundary row, kappa^gamma (nu/gamma) d h.
    const double kappa = 0.7;
    const auto flat = energy_riemann_gap([&](int, double, double) { return kappa; }, p, 2, {8, 16});
    for (const auto& r : flat.rows) {
      CHECK(r.error == doctest::Approx(p.nu / p.gamma * std::pow(kappa, p.gamma) * 2 * r.h).epsilon(1e-10));
    }
    const auto none = energy_riemann_gap([](int, double, double) { return 0.0; }, p, 2, {8});
    CHECK(none.rows[0].error == 0.0);
  }

  TEST_CASE("grid operator equals the graph Laplacian up to row scaling") {
    GridSpec g = GridSpec::unit(2, 5);
    g.cells[1] = 4;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    const auto f = make_field(g, [&](int, double, double) { return u(rng); }, 0.3);
    CHECK(grid_graph_matrix_deviation(f, g) < 1e-13);

    // Same pressures from both solvers.
    auto s = sample_nodes(g, [](double x, double y) { return std::cos(pi * x) * std::cos(pi * y); });
    double t = 0, w = 0;
    for (std::size_t v = 0; v < s.size(); ++v) {
      t += g.node_weight(v) * s[v];
      w += g.node_weight(v);
    }
    for (double& x : s) x -= t / w;
    const auto grid_p = solve_poisson_grid(f, s, g);
    const auto sampled = sample_network_from_fields(f, nullptr, g, SampleMode::permeability);
    std::vector<double> scaled(s.size());
    for (std::size_t v = 0; v < s.size(); ++v) scaled[v] = g.node_weight(v) * s[v];
    KirchhoffOptions opt;
    opt.length_exponent = 2;
    opt.tolerance = 1e-12;
    const auto graph_p = solve_pressures(sampled.network, SourceVector(scaled), opt);
    const double shift = graph_p.pressures[0] - grid_p.p[0];
    for (std::size_t v = 0; v < s.size(); ++v) CHECK(graph_p.pressures[v] - shift == doctest::Approx(grid_p.p[v]).scale(1.0));
  }

  TEST_CASE("gradient flow structure needs uniform weights") {
    const EnergyParams p{1.5, 1.0, 0.5};
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    const auto g = GridSpec::unit(2, 4);
    const auto f = make_field(g, [&](int, double, double) { return u(rng); }, 1.0, false);
    const auto sampled = sample_network_from_fields(f, [](double x, double y) { return std::cos(pi * x) + x * y; }, g);
    CHECK(uniform_weight_gradient_check(sampled, p) <= 1e-5);

    GridSpec stretched = GridSpec::unit(2, 4);
    stretched.cells[1] = 8;
    const auto fs = make_field(stretched, [&](int, double, double) { return u(rng); }, 1.0, false);
    const auto ss = sample_network_from_fields(fs, [](double x, double y) { return std::cos(pi * x) + x * y; }, stretched);
    CHECK(uniform_weight_gradient_check(ss, p, false) <= 1e-5);
    CHECK(uniform_weight_gradient_check(ss, p, true) >= 1e-2);

    // Single edge at its fixed point: both sides vanish.
    const auto line = GridSpec::unit(1, 1);
    const double c_star = 1.0;
    auto one = sample_network_from_fields(make_field(line, [&](int, double, double) { return c_star; }, 1.0, false),
                                          [](double x, double) { return x < 0.5 ? 1.0 : -1.0; }, line);
    // Q = C dP / L with m = 2: Q = S L, so Q^2 / C^2 = nu C^(gamma - 1) when C = 1, S L = 1.
    CHECK(uniform_weight_gradient_check(one, p) <= 1e-5);
  }
}
