// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "netadapt/bridge.hpp"
#include "netadapt/dynamics.hpp"
#include "netadapt/energy.hpp"
#include "netadapt/geometry.hpp"
#include "netadapt/scenario.hpp"
#include "oracles.hpp"

using namespace netadapt;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail, double seconds) {
  std::printf("%s criterion %2d  %-28s %s (%.2fs)\n", ok ? "PASS" : "FAIL", id, title, detail.c_str(), seconds);
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <typename Fn>
void run(int id, const char* title, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = false;
  try {
    ok = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(id, title, ok, detail, secs);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

bool same_support(const Network& a, const Network& b, double thr) {
  for (std::size_t e = 0; e < a.num_edges(); ++e) {
    if ((a.edge(e).conductivity > thr) != (b.edge(e).conductivity > thr)) return false;
  }
  return true;
}

// 1. Gradient against central differences with a fresh Kirchhoff solve.
bool gradient_oracle(std::string& detail) {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  int graphs = 0;
  const auto start = std::chrono::steady_clock::now();
  for (; graphs < 24; ++graphs) {
    const std::size_t n = 3 + static_cast<std::size_t>(graphs % 10);
    const auto net = oracle::random_connected(rng, n, n);
    const SourceVector s(oracle::random_sources(rng, n));
    const EnergyParams p{oracle::uniform(rng, 0.3, 2.0), oracle::uniform(rng, 0.5, 2.0), 1.5};
    ModelOptions opt;
    opt.length_exponent = 1;
    const auto g = energy_gradient(net, s, p, opt);
    auto cs = net.conductivities();
    for (std::size_t e = 0; e < net.num_edges(); ++e) {
      const double c = cs[e];
      const double h = 1e-6 * c;
      cs[e] = c + h;
      const double up = discrete_energy(net.with_conductivities(cs), s, p, opt).total();
      cs[e] = c - h;
      const double down = discrete_energy(net.with_conductivities(cs), s, p, opt).total();
      cs[e] = c;
      const double fd = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(fd - g[e]) / std::abs(g[e]));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  detail = fmt("%.0f graphs, max per-edge relative error %.2e", graphs, worst);
  return worst <= 1e-5 && secs < 30.0;
}

// 2. Energy is non-increasing across accepted iterations.
bool monotonicity(std::string& detail) {
  std::mt19937_64 rng(77);
  int scenarios = 0;
  double worst = -1e300;
  std::vector<std::pair<Network, SourceVector>> problems;
  {
    auto small = init_conductivities(generate_diamond("small-diamond:4"), InitSpec{});
    problems.emplace_back(small, build_sources(small));
    auto net = oracle::random_connected(rng, 10, 8);
    problems.emplace_back(net, SourceVector(oracle::random_sources(rng, 10)));
  }
  for (const auto& [net, s] : problems) {
    for (double gamma : {0.5, 1.0, 1.5}) {
      for (auto mode : {StepMode::explicit_euler, StepMode::proximal}) {
        DynamicsConfig cfg;
        cfg.energy = EnergyParams::hu_cai(gamma, 1.0, MetabolicForm::nu);
        cfg.mode = mode;
        cfg.length_exponent = 2;
        cfg.tau = mode == StepMode::proximal ? 0.025 : 1e-3;
        cfg.tau_growth = 2.0;
        cfg.max_iters = 3000;
        const auto traj = run_to_steady_state(net, s, cfg);
        if (traj.termination == Termination::error) {
          detail = "run failed: " + traj.error_message;
          return false;
        }
        for (std::size_t k = 1; k < traj.records.size(); ++k) {
          worst = std::max(worst, traj.records[k].energy.total() - traj.records[k - 1].energy.total());
        }
        ++scenarios;
      }
    }
  }
  detail = fmt("%.0f scenarios, largest energy increase %.2e", scenarios, worst);
  return worst <= 1e-10 && scenarios >= 10;
}

// 3. Single-edge steady state against the closed form and an RK4 integration.
bool single_edge(std::string& detail) {
  double worst = 0.0;
  double worst_ode = 0.0;
  for (auto [s, nu, gamma] : {std::tuple{1.0, 1.0, 0.5}, {2.0, 1.0, 0.5}, {1.0, 4.0, 1.5}}) {
    const double closed = std::pow(s * s / nu, 1.0 / (gamma + 1.0));
    const double alpha = 2.0 - gamma;
    // Flow dC/dt = (Q^2/C - nu C^gamma) C^(alpha-1), Q = S.
    const double ode = oracle::rk4(
        [&](double c) { return (s * s / c - nu * std::pow(c, gamma)) * std::pow(c, alpha - 1.0); }, 0.3, 1e-3,
        200000);
    worst_ode = std::max(worst_ode, std::abs(ode - closed));
    DynamicsConfig cfg;
    cfg.energy = EnergyParams::hu_cai(gamma, nu);
    cfg.tol = 1e-14;
    cfg.tau_growth = 2.0;
    const auto traj = run_to_steady_state(oracle::single_edge(0.3), SourceVector({s, -s}), cfg);
    if (traj.termination == Termination::error) return false;
    worst = std::max(worst, std::abs(traj.final_network.edge(0).conductivity - ode));
  }
  detail = fmt("max |C - oracle| %.2e (closed form vs ODE %.2e)", worst, worst_ode);
  return worst <= 1e-6 && worst_ode <= 1e-9;
}

ScenarioConfig diamond_config(double gamma, const std::string& preset) {
  auto cfg = default_scenario();
  cfg.preset = preset;
  cfg.dynamics.energy = EnergyParams::hu_cai(gamma, 1.0, MetabolicForm::nu);
  cfg.dynamics.tau = 0.025;
  cfg.dynamics.tol = 1e-6;
  return cfg;
}

// 4. Tree for gamma < 1, loops for gamma > 1.
bool phase_transition(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  auto low = diamond_config(0.5, "small-diamond:5");
  auto high = diamond_config(1.5, "small-diamond:5");
  low.init.extra_loops = high.init.extra_loops = 3;
  const auto a = run_scenario(low);
  const auto b = run_scenario(high);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  detail = "gamma=0.5: " + a.classification + ", gamma=1.5: " + b.classification;
  if (!a.ok || !b.ok) {
    detail += " (" + a.error_message + b.error_message + ")";
    return false;
  }
  return a.n_cycles == 0 && b.n_cycles >= 1 && secs < 120.0;
}

// 5. The cut conductivity never falls below the lower bound.
bool connectivity_bound(std::string& detail) {
  // Two K4 clusters joined by two bridges.
  std::vector<Vertex> vs(8);
  std::vector<Edge> es;
  for (std::size_t base : {0u, 4u})
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i + 1; j < 4; ++j) es.push_back({base + i, base + j, 1.0, 1.0});
  es.push_back({0, 4, 1.0, 3.0});
  es.push_back({3, 7, 1.5, 3.0});
  const auto net = Network::build(vs, es);
  const SourceVector s({1.0, 0.5, 0.0, 0.0, -0.5, -1.0, 0.0, 0.0});
  const std::vector<VertexId> left{0, 1, 2, 3};
  const auto part = CutPartition::from_first(8, left);
  const auto cut = part.cut_edges(net);
  double slack = 1e300;
  CutBound bound;
  for (double gamma : {0.5, 0.8}) {
    for (auto mode : {StepMode::explicit_euler, StepMode::proximal}) {
      DynamicsConfig cfg;
      cfg.energy = EnergyParams{gamma, 1.0, 1.2 - gamma * 0.5, MetabolicForm::nu_over_gamma};
      cfg.mode = mode;
      cfg.tau = mode == StepMode::explicit_euler ? 1e-3 : 1e-2;
      cfg.tol = 1e-12;
      cfg.max_iters = 20000;
      cfg.snapshot_every = 1;
      bound = cut_bound(net, part, s, cfg.energy);
      const auto traj = run_to_steady_state(net, s, cfg);
      if (traj.termination == Termination::error) {
        detail = traj.error_message;
        return false;
      }
      for (const auto& r : traj.records) {
        if (r.conductivities.empty()) continue;
        double u = 0.0;
        for (EdgeId e : cut) u += r.conductivities[e];
        slack = std::min(slack, u - bound.bound);
      }
    }
  }
  detail = fmt("bound %.4g, min(u - bound) %.3e", bound.bound, slack);
  return slack >= -1e-8;
}

// 6. Support independent of nu, conductivities decreasing in nu.
bool nu_scaling(std::string& detail) {
  std::vector<ScenarioConfig> configs;
  for (double nu : {1.0, 100.0, 1e5}) {
    auto cfg = diamond_config(0.5, "paper-diamond");
    cfg.dynamics.energy.nu = nu;
    configs.push_back(cfg);
  }
  const auto r = sweep(configs, 1);
  for (const auto& x : r)
    if (!x.ok) return false;
  const bool support = same_support(r[0].final_network, r[1].final_network, 1e-12) &&
                       same_support(r[0].final_network, r[2].final_network, 1e-12);
  const bool decreasing = r[1].max_conductivity < r[0].max_conductivity && r[2].max_conductivity < r[1].max_conductivity;
  detail = fmt("max C = %.4g, %.4g, %.4g", r[0].max_conductivity, r[1].max_conductivity, r[2].max_conductivity) +
           (support ? ", same support" : ", support differs");
  return support && decreasing;
}

// 7. Same steady state from tree magnitudes 100, 1e3, 1e4.
bool delta_independence(std::string& detail) {
  std::vector<Network> finals;
  for (double delta : {100.0, 1e3, 1e4}) {
    auto cfg = diamond_config(0.5, "paper-diamond");
    cfg.init.delta = delta;
    const auto r = run_scenario(cfg);
    if (!r.ok) return false;
    finals.push_back(r.final_network);
  }
  double worst = 0.0;
  for (std::size_t k = 1; k < finals.size(); ++k) {
    if (!same_support(finals[0], finals[k], 1e-12)) {
      detail = "support differs";
      return false;
    }
    for (std::size_t e = 0; e < finals[0].num_edges(); ++e) {
      const double a = finals[0].edge(e).conductivity;
      const double b = finals[k].edge(e).conductivity;
      if (a > 1e-12) worst = std::max(worst, std::abs(a - b) / a);
    }
  }
  detail = fmt("max relative per-edge difference %.2e", worst);
  return worst <= 1e-4;
}

// 8. Discrete dissipation inequality of the continuum model.
bool pde_dissipation(std::string& detail) {
  double worst = -1e300;
  double min_c = 1e300;
  bool monotone = true;
  const auto grid = GridSpec::unit(2, 32);
  for (double gamma : {1.5, 2.0}) {
    for (double d2 : {1e-2, 1e-1}) {
      PDERunConfig run;
      run.grid = grid;
      run.pde.scheme = TimeScheme::implicit;
      run.pde.gamma = gamma;
      run.pde.D2 = d2;
      run.pde.dt = 1e-3;
      run.pde.T = 0.05;
      run.seed = 11;
      const auto trace = run_pde(run.pde, grid, pde_initial_field(run), pde_sources(run));
      worst = std::max(worst, trace.worst_excess);
      monotone = monotone && trace.monotone;
      for (double m : trace.min_c) min_c = std::min(min_c, m);
    }
  }
  detail = fmt("max relative excess %.2e, min c %.2e", worst, min_c) + (monotone ? ", monotone" : ", not monotone");
  return worst <= 1e-8 && min_c >= 0.0;
}

// 9. Consistency orders.
bool consistency(std::string& detail) {
  constexpr double two_pi = 2.0 * M_PI;
  // An exactly first-order quantity fits to 1 - O(h) on three grids.
  constexpr double min_order = 0.99;
  const std::vector<int> cells{16, 32, 64};
  const auto k1 = kirchhoff_consistency([](int, double x, double) { return 2 + std::cos(two_pi * x); },
                                        [](double x, double) { return std::sin(two_pi * x); }, 1, cells);
  const auto k2 = kirchhoff_consistency(
      [](int k, double x, double y) { return k == 0 ? 2 + std::cos(two_pi * x) : 2 + std::sin(two_pi * y); },
      [](double x, double y) { return std::sin(two_pi * x) * std::cos(two_pi * y); }, 2, cells);
  const auto p1 = poisson_convergence(1, cells);
  const auto p2 = poisson_convergence(2, cells);
  const EnergyParams params{1.5, 1.0, 0.5};
  const auto r1 = energy_riemann_gap([](int, double x, double) { return 1 + x * (1 - x); }, params, 1, cells);
  const auto r2 = energy_riemann_gap([](int k, double x, double y) { return 1 + 0.5 * (k == 0 ? x : y) + x * y; },
                                     params, 2, cells);
  double lowest = 1e300;
  for (const auto* t : {&k1, &k2, &p1, &p2, &r1, &r2}) lowest = std::min(lowest, t->order);
  detail = fmt("orders: kirchhoff %.2f/%.2f, ", k1.order, k2.order) + fmt("poisson %.2f/%.2f, ", p1.order, p2.order) +
           fmt("riemann %.4f/%.4f", r1.order, r2.order);
  return lowest >= min_order;
}

// 10. Gradient flow structure for uniform weights only.
bool weights(std::string& detail) {
  const EnergyParams p{1.5, 1.0, 0.5};
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  const auto g = GridSpec::unit(2, 4);
  const auto f = make_field(g, [&](int, double, double) { return u(rng); }, 1.0, false);
  const auto sampled = sample_network_from_fields(f, [](double x, double y) { return std::cos(M_PI * x) + x * y; }, g);
  const double uniform = uniform_weight_gradient_check(sampled, p);
  GridSpec stretched = GridSpec::unit(2, 4);
  stretched.cells[1] = 8;
  const auto fs2 = make_field(stretched, [&](int, double, double) { return u(rng); }, 1.0, false);
  const auto ss = sample_network_from_fields(fs2, [](double x, double y) { return std::cos(M_PI * x) + x * y; }, stretched);
  const double nonuniform = uniform_weight_gradient_check(ss, p, true);
  detail = fmt("uniform %.2e, non-uniform %.2e", uniform, nonuniform);
  return uniform <= 1e-5 && nonuniform >= 1e-2;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 11. Bit-identical trajectories from the same config and seed.
bool determinism(std::string& detail) {
  const auto root = fs::temp_directory_path() / "netadapt_acceptance";
  fs::remove_all(root);
  bool all = true;
  int compared = 0;
  for (auto kind : {InitKind::tree, InitKind::full_noise}) {
    auto cfg = diamond_config(1.5, "paper-diamond");
    cfg.init.kind = kind;
    cfg.init.delta = kind == InitKind::tree ? 5.0 : 1.0;
    cfg.init.seed = 31;
    for (int rep = 0; rep < 2; ++rep) {
      cfg.output_dir = root / (std::to_string(compared) + "_" + std::to_string(rep));
      if (!run_scenario(cfg).ok) return false;
    }
    const auto a = slurp(root / (std::to_string(compared) + "_0") / "trajectory.csv");
    const auto b = slurp(root / (std::to_string(compared) + "_1") / "trajectory.csv");
    all = all && !a.empty() && a == b;
    ++compared;
  }
  fs::remove_all(root);
  detail = fmt("%.0f config pairs compared byte for byte", compared);
  return all;
}

}  // namespace

int main() {
  run(1, "gradient oracle", gradient_oracle);
  run(2, "energy monotonicity", monotonicity);
  run(3, "single-edge analytics", single_edge);
  run(4, "phase transition", phase_transition);
  run(5, "connectivity bound", connectivity_bound);
  run(6, "nu scaling", nu_scaling);
  run(7, "delta independence", delta_independence);
  run(8, "pde dissipation", pde_dissipation);
  run(9, "consistency orders", consistency);
  run(10, "uniform weights", weights);
  run(11, "determinism", determinism);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
