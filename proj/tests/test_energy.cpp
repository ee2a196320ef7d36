#include <doctest.h>

#include <cmath>
#include <random>

#include "netadapt/energy.hpp"
#include "netadapt/error.hpp"
#include "oracles.hpp"

using namespace netadapt;

TEST_SUITE("energy") {
  TEST_CASE("single edge by substitution") {
    const EnergyParams p{0.5, 1.0, 1.5};
    const auto e = discrete_energy(oracle::single_edge(1.0), SourceVector({1, -1}), p);
    CHECK(e.pumping == doctest::Approx(1.0));
    CHECK(e.metabolic == doctest::Approx(2.0));
    CHECK(e.total() == doctest::Approx(3.0));
  }

  TEST_CASE("zero sources leave only the metabolic part") {
    const auto net = Network::build(std::vector<Vertex>(4), {{0, 1, 1, 2}, {1, 2, 2, 3}, {1, 3, 1, 0.5}});
    const EnergyParams p{0.5, 1.0, 1.5};
    const auto e = discrete_energy(net, SourceVector(std::vector<double>(4, 0.0)), p);
    CHECK(e.pumping == 0.0);
    CHECK(e.metabolic == doctest::Approx(2 * (std::sqrt(2.0) + 2 * std::sqrt(3.0) + std::sqrt(0.5))));
  }

  TEST_CASE("energy matches an independent evaluation") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
      const auto net = oracle::random_connected(rng, 8, 6);
      const auto s = oracle::random_sources(rng, 8);
      for (auto form : {MetabolicForm::nu_over_gamma, MetabolicForm::nu}) {
        const EnergyParams p{0.5, 1.3, 1.5, form};
        for (int m : {1, 2}) {
          ModelOptions opt;
          opt.length_exponent = m;
          const double mine = discrete_energy(net, SourceVector(s), p, opt).total();
          const double ref = oracle::energy(net, s, m, p.metabolic_coefficient(), p.gamma);
          CHECK(mine == doctest::Approx(ref).epsilon(1e-10));
        }
      }
    }
  }

  TEST_CASE("gradient examples") {
    const EnergyParams p{0.5, 1.0, 1.5};
    // Fixed point C = (S^2/nu)^(1/(gamma+1)).
    const double s = 2.0;
    const double c_star = std::pow(s * s, 1.0 / 1.5);
    const auto g0 = energy_gradient(oracle::single_edge(c_star), SourceVector({s, -s}), p);
    CHECK(std::abs(g0[0]) < 1e-12);
    const auto g = energy_gradient(oracle::single_edge(2.0), SourceVector({1, -1}), p);
    CHECK(g[0] == doctest::Approx(-(0.25 - std::pow(2.0, -0.5))).epsilon(1e-12));
    CHECK(g[0] == doctest::Approx(0.45711).epsilon(1e-5));
  }

  TEST_CASE("gradient sign and finite differences") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 5; ++trial) {
      const auto net = oracle::random_connected(rng, 7, 4);
      const auto s = oracle::random_sources(rng, 7);
      const EnergyParams p{0.5 + 0.5 * trial, 1.0, 1.0};
      const auto g = energy_gradient(net, SourceVector(s), p);
      const auto st = solve_pressures(net, SourceVector(s));
      for (std::size_t e = 0; e < net.num_edges(); ++e) {
        const double c = net.edge(e).conductivity;
        const double qc = st.fluxes[e] / c;
        const double sign = p.nu * std::pow(c, p.gamma - 1) - qc * qc;
        if (std::abs(sign) > 1e-9) CHECK((g[e] > 0) == (sign > 0));
        auto cs = net.conductivities();
        const double h = 1e-6 * c;
        cs[e] = c + h;
        const double up = oracle::energy(net.with_conductivities(cs), s, 1, p.metabolic_coefficient(), p.gamma);
        cs[e] = c - h;
        const double down = oracle::energy(net.with_conductivities(cs), s, 1, p.metabolic_coefficient(), p.gamma);
        CHECK(g[e] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-5).scale(1e-3));
      }
    }
  }

  TEST_CASE("singular gradient on pruned edges for gamma < 1") {
    const auto net = Network::build(std::vector<Vertex>(3), {{0, 1, 1, 1}, {1, 2, 1, 1}, {0, 2, 1, 0}});
    CHECK_THROWS_AS(energy_gradient(net, SourceVector({1, 0, -1}), EnergyParams{0.5, 1, 1.5}), Error);
  }

  TEST_CASE("dissipation examples and inner product identity") {
    const EnergyParams p{0.5, 1.0, 1.5};
    CHECK(dissipation_rate(oracle::single_edge(0.5), SourceVector({1, -1}), p) ==
          doctest::Approx(-std::pow(2 - std::pow(0.5, 0.5), 2) * std::pow(0.5, -0.5)).epsilon(1e-12));
    CHECK(dissipation_rate(oracle::single_edge(1.0), SourceVector({1, -1}), p) == doctest::Approx(0.0));

    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
      const auto net = oracle::random_connected(rng, 9, 5);
      const SourceVector s(oracle::random_sources(rng, 9));
      const EnergyParams q{0.5 + 0.25 * (trial % 4), 1.5, 1.2};
      const auto st = solve_pressures(net, s);
      const auto g = energy_gradient(net, s, q);
      const auto v = flow_velocity(net, st, q, 1e-12);
      double inner = 0.0;
      for (std::size_t e = 0; e < g.size(); ++e) inner += g[e] * v[e];
      const double d = dissipation_rate(net, s, q);
      CHECK(d <= 0.0);
      CHECK(inner == doctest::Approx(d).epsilon(1e-10));
      const auto parts = discrete_energy(net, s, q);
      CHECK(parts.pumping >= 0.0);
      CHECK(parts.metabolic >= 0.0);
    }
  }

  TEST_CASE("weighted energy") {
    std::mt19937_64 rng(29);
    auto net = oracle::random_connected(rng, 6, 3);
    std::vector<Edge> unit;
    for (const auto& e : net.edges()) unit.push_back({e.i, e.j, 1.0, e.conductivity});
    const auto n1 = Network::build(net.vertices(), unit);
    const SourceVector s(oracle::random_sources(rng, 6));
    const EnergyParams p{0.5, 1.0, 1.5};
    ModelOptions opt;
    opt.length_exponent = 2;
    CHECK(weighted_energy(n1, s, p, 1.0, 2, opt) == doctest::Approx(discrete_energy(n1, s, p, opt).total()));
    CHECK(weighted_energy(n1, s, p, 2.0, 2, opt) == doctest::Approx(4 * weighted_energy(n1, s, p, 1.0, 2, opt)));
    CHECK(weighted_energy(n1, s, p, 2.0, 1, opt) == doctest::Approx(2 * weighted_energy(n1, s, p, 1.0, 1, opt)));

    // Uniform 1D grid with h = 0.1.
    std::vector<Vertex> vs(11);
    std::vector<Edge> es;
    std::vector<double> src(11, 0.0);
    src[0] = 1;
    src[10] = -1;
    for (std::size_t i = 0; i < 10; ++i) es.push_back({i, i + 1, 0.1, 1.0 + 0.1 * static_cast<double>(i)});
    const auto line = Network::build(vs, es);
    CHECK(weighted_energy(line, SourceVector(src), p, 0.1, 1, opt) ==
          doctest::Approx(discrete_energy(line, SourceVector(src), p, opt).total()));
  }
}
