#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "netadapt/error.hpp"
#include "netadapt/geometry.hpp"
#include "netadapt/network_io.hpp"
#include "netadapt/scenario.hpp"
#include "netadapt/trajectory_io.hpp"

using namespace netadapt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("netadapt_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("paper diamond size and domain") {
    const auto net = generate_diamond("paper-diamond");
    CHECK(net.num_vertices() == 78);
    CHECK(net.num_edges() == 201);
    for (const auto& v : net.vertices()) {
      CHECK(v.x > 0.0);
      CHECK(v.x < 2.0);
      CHECK(v.y > -1.5);
      CHECK(v.y < 0.5);
    }
  }

  TEST_CASE("small diamond is a planar triangulation") {
    for (int n : {3, 5, 8}) {
      const auto net = generate_diamond("small-diamond:" + std::to_string(n));
      auto full = net.conductivities();
      std::fill(full.begin(), full.end(), 1.0);
      const auto all = net.with_conductivities(full);
      CHECK(net.num_vertices() == static_cast<std::size_t>(n * n));
      // Euler: independent cycles = bounded faces = 2 (n-1)^2 triangles.
      CHECK(cycle_count(all, 0.0) == static_cast<std::size_t>(2 * (n - 1) * (n - 1)));
      CHECK(active_components(all, 0.0).size() == 1);
      for (const auto& v : net.vertices()) {
        CHECK(v.x > 0.0);
        CHECK(v.x < 2.0);
        CHECK(v.y > -1.5);
        CHECK(v.y < 0.5);
      }
    }
    CHECK(generate_diamond("small-diamond").num_vertices() == 25);
    CHECK(generate_diamond("small-diamond(4)").num_vertices() == 16);
    CHECK_THROWS_AS(generate_diamond("small-diamond:1"), Error);
    CHECK_THROWS_AS(generate_diamond("hexagon"), Error);
  }

  TEST_CASE("sources") {
    const auto net = Network::build({{0.0, -0.5}, {0.2, 0.0}, {0.5, 0.3}}, {{0, 1, 1, 1}, {1, 2, 1, 1}});
    const auto s = build_sources(net);
    CHECK(s[0] == doctest::Approx(1e4));
    CHECK(s[1] == doctest::Approx(-5e3));
    CHECK(s[2] == s[1]);
    for (const char* preset : {"paper-diamond", "small-diamond", "small-diamond:9"}) {
      const auto d = build_sources(generate_diamond(preset));
      CHECK(std::abs(d.total()) <= 1e-9 * d.l1_norm());
    }
    const auto far = Network::build({{1.0, 0.0}, {2.0, 0.0}}, {{0, 1, 1, 1}});
    try {
      build_sources(far);
      FAIL("expected empty_source_set");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::empty_source_set);
    }
  }

  TEST_CASE("initial conductivities") {
    const auto net = generate_diamond("paper-diamond");
    InitSpec spec;
    const auto tree = init_conductivities(net, spec);
    std::size_t at_delta = 0;
    for (const auto& e : tree.edges()) {
      if (e.conductivity == 5.0) ++at_delta;
      else CHECK(e.conductivity == 1e-10);
    }
    CHECK(at_delta == net.num_vertices() - 1);
    CHECK(cycle_count(tree, 1e-9) == 0);

    spec.epsilon = 0.1;
    const auto pert = init_conductivities(net, spec);
    for (std::size_t e = 0; e < net.num_edges(); ++e)
      CHECK(pert.edge(e).conductivity == doctest::Approx(tree.edge(e).conductivity + 0.1).epsilon(1e-15));

    InitSpec noise;
    noise.kind = InitKind::full_noise;
    noise.delta = 1.0;
    noise.seed = 99;
    const auto a = init_conductivities(net, noise).conductivities();
    const auto b = init_conductivities(net, noise).conductivities();
    CHECK(a == b);
    for (double c : a) {
      CHECK(c >= 1.0);
      CHECK(c < 2.0);
    }

    InitSpec random_tree;
    random_tree.seed = 7;
    const auto rt = init_conductivities(net, random_tree);
    CHECK(cycle_count(rt, 1e-9) == 0);
    CHECK(active_components(rt, 1e-9).size() == 1);

    InitSpec bad;
    bad.tree_edges = std::vector<EdgeId>{0, 1};
    CHECK_THROWS_AS(init_conductivities(net, bad), Error);

    InitSpec loops;
    loops.extra_loops = 3;
    CHECK(cycle_count(init_conductivities(net, loops), 1e-9) == 3);
  }
}

TEST_SUITE("experiments") {
  TEST_CASE("config parsing") {
    const auto cfg = parse_scenario(R"({"name": "x", "energy": {"gamma": 1.5, "nu": 2},
        "dynamics": {"mode": "explicit", "tau": 0.01}, "init": {"kind": "full_noise", "seed": 3}})");
    CHECK(cfg.name == "x");
    CHECK(cfg.dynamics.energy.gamma == 1.5);
    CHECK(cfg.dynamics.energy.alpha == doctest::Approx(0.5));
    CHECK(cfg.dynamics.mode == StepMode::explicit_euler);
    CHECK(cfg.init.kind == InitKind::full_noise);
    CHECK(cfg.init.seed == 3);
    const auto def = default_scenario();
    CHECK(def.dynamics.energy.nu == 1.0);
    CHECK(def.dynamics.tau == 0.025);
    CHECK(def.dynamics.tol == 1e-6);
    for (const char* bad : {R"({"typo": 1})", R"({"energy": {"gamma": "x"}})", "{", R"({"init": {"kind": "star"}})"}) {
      try {
        parse_scenario(bad);
        FAIL("expected config_error");
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::config_error);
      }
    }
  }

  TEST_CASE("phase transition on the small diamond") {
    for (double gamma : {0.5, 1.5}) {
      auto cfg = default_scenario();
      cfg.dynamics.energy = EnergyParams::hu_cai(gamma, 1.0, MetabolicForm::nu);
      const auto report = run_scenario(cfg);
      REQUIRE(report.ok);
      if (gamma < 1) {
        CHECK(report.classification == "tree");
      } else {
        CHECK(report.n_cycles >= 1);
      }
      CHECK(report.n_cycles == cycle_count(report.final_network, cfg.dynamics.prune_threshold));
    }
  }

  TEST_CASE("nu sweep keeps the support and lowers the conductivities") {
    std::vector<ScenarioConfig> configs;
    for (double nu : {1.0, 100.0, 1e5}) {
      auto cfg = default_scenario();
      cfg.preset = "paper-diamond";
      cfg.dynamics.energy.nu = nu;
      configs.push_back(cfg);
    }
    const auto reports = sweep(configs, 2);
    for (const auto& r : reports) REQUIRE(r.ok);
    for (std::size_t k = 1; k < reports.size(); ++k) {
      CHECK(reports[k].max_conductivity < reports[k - 1].max_conductivity);
      for (std::size_t e = 0; e < reports[0].final_network.num_edges(); ++e) {
        CHECK((reports[k].final_network.edge(e).conductivity > 1e-12) ==
              (reports[0].final_network.edge(e).conductivity > 1e-12));
      }
    }
  }

  TEST_CASE("small perturbations keep the tree") {
    // The support survives perturbations far below the pressure-gradient
    // scale of the tree; larger ones can switch to another local minimum.
    auto base = default_scenario();
    base.preset = "paper-diamond";
    const auto ref = run_scenario(base);
    REQUIRE(ref.ok);
    for (double eps : {1e-10, 1e-9}) {
      auto cfg = base;
      cfg.init.epsilon = eps;
      const auto r = run_scenario(cfg);
      REQUIRE(r.ok);
      for (std::size_t e = 0; e < r.final_network.num_edges(); ++e) {
        CHECK((r.final_network.edge(e).conductivity > 1e-12) == (ref.final_network.edge(e).conductivity > 1e-12));
      }
    }
  }

  TEST_CASE("sweep records per-scenario errors and keeps input order") {
    auto good = default_scenario();
    good.name = "good";
    auto bad = default_scenario();
    bad.name = "bad";
    bad.preset = "no-such-preset";
    const auto reports = sweep({good, bad, good}, 3);
    REQUIRE(reports.size() == 3);
    CHECK(reports[0].ok);
    CHECK_FALSE(reports[1].ok);
    CHECK(reports[1].error_code == "invalid_preset");
    CHECK(reports[2].ok);
    CHECK(reports[0].final_network.conductivities() == reports[2].final_network.conductivities());
  }

  TEST_CASE("artifacts and determinism") {
    auto cfg = default_scenario();
    cfg.init.kind = InitKind::full_noise;
    cfg.init.delta = 1.0;
    cfg.init.seed = 5;
    cfg.dynamics.energy = EnergyParams::hu_cai(1.5, 1.0, MetabolicForm::nu);
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    cfg.output_dir = a;
    run_scenario(cfg);
    cfg.output_dir = b;
    run_scenario(cfg);
    for (const char* f : {"trajectory.csv", "network.csv", "plot.csv", "prune_events.csv", "report.json"}) {
      CHECK(fs::exists(a / f));
    }
    CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
    CHECK(slurp(a / "network.csv") == slurp(b / "network.csv"));
    const auto j = nlohmann::json::parse(slurp(a / "report.json"));
    CHECK(j["status"] == "ok");
    CHECK(j["config"]["init"]["seed"] == 5);
    // The written network reads back unchanged.
    const auto back = read_network(a / "network.csv");
    const auto again = run_scenario(cfg);
    CHECK(back.conductivities() == again.final_network.conductivities());
  }

  TEST_CASE("network file input") {
    const auto dir = scratch("netfile");
    fs::create_directories(dir);
    write_network(dir / "net.csv", generate_diamond("small-diamond:4"));
    std::ofstream(dir / "cfg.json") << R"({"geometry": {"file": "net.csv"}, "energy": {"gamma": 0.5}})";
    const auto cfg = load_scenario(dir / "cfg.json");
    const auto r = run_scenario(cfg);
    CHECK(r.ok);
    CHECK(r.classification == "tree");
    std::ofstream(dir / "missing.json") << R"({"geometry": {"file": "nope.csv"}})";
    const auto r2 = run_scenario(load_scenario(dir / "missing.json"));
    CHECK_FALSE(r2.ok);
    CHECK(r2.error_code == "io_error");
  }
}
