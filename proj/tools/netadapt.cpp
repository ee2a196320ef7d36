// Command line front end: run, sweep, pde and bridge.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "netadapt/error.hpp"
#include "netadapt/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned parallel = 1;
  std::string preset;
};

int fail(const std::string& code, const std::string& message) {
  json j = {{"status", "error"}, {"error", {{"code", code}, {"message", message}}}};
  std::cout << j.dump(2) << std::endl;
  return 1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw netadapt::Error(netadapt::ErrorCode::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void apply_overrides(netadapt::ScenarioConfig& cfg, const Options& opt) {
  if (opt.seed) cfg.init.seed = *opt.seed;
  if (!opt.preset.empty()) {
    cfg.preset = opt.preset;
    cfg.network_file.clear();
  }
}

int cmd_run(const Options& opt) {
  auto cfg = opt.config.empty() ? netadapt::default_scenario() : netadapt::load_scenario(opt.config);
  apply_overrides(cfg, opt);
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  const auto report = netadapt::run_scenario(cfg);
  std::cout << netadapt::report_json(report) << std::endl;
  return report.ok ? 0 : 1;
}

int cmd_sweep(const Options& opt) {
  if (opt.config.empty()) return fail("config_error", "sweep requires --config");
  auto configs = netadapt::load_sweep(opt.config);
  std::set<std::string> used;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    auto& cfg = configs[i];
    apply_overrides(cfg, opt);
    std::string dir = cfg.name;
    if (!used.insert(dir).second) {
      dir += "_" + std::to_string(i);
      used.insert(dir);
    }
    if (!opt.out.empty()) cfg.output_dir = fs::path(opt.out) / dir;
  }
  const auto reports = netadapt::sweep(configs, opt.parallel);
  json summary = json::array();
  bool all_ok = true;
  for (const auto& r : reports) {
    summary.push_back(json::parse(netadapt::report_json(r)));
    all_ok = all_ok && r.ok;
  }
  json j = {{"status", all_ok ? "ok" : "error"}, {"scenarios", summary}};
  if (!opt.out.empty()) {
    fs::create_directories(opt.out);
    std::ofstream(fs::path(opt.out) / "sweep.json") << j.dump(2) << '\n';
  }
  std::cout << j.dump(2) << std::endl;
  return all_ok ? 0 : 1;
}

int cmd_pde(const Options& opt) {
  auto cfg = netadapt::parse_pde_config(opt.config.empty() ? std::string("{}") : slurp(opt.config));
  if (opt.seed) cfg.seed = *opt.seed;
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  std::cout << netadapt::run_pde_scenario(cfg) << std::endl;
  return 0;
}

int cmd_bridge(const Options& opt) {
  const std::string text = netadapt::run_bridge_studies(opt.out);
  std::cout << text << std::endl;
  return json::parse(text).value("status", "") == "ok" ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive transport network simulations"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON configuration file");
    sub->add_option("--out", opt.out, "output directory");
  };
  auto* run = app.add_subcommand("run", "run a single scenario");
  add_common(run);
  run->add_option("--seed", opt.seed, "seed for the initial condition");
  run->add_option("--preset", opt.preset, "geometry preset (paper-diamond, small-diamond:N)");
  auto* sw = app.add_subcommand("sweep", "run a list of scenarios");
  add_common(sw);
  sw->add_option("--seed", opt.seed, "seed applied to every scenario");
  sw->add_option("--preset", opt.preset, "geometry preset applied to every scenario");
  sw->add_option("--parallel", opt.parallel, "number of worker threads")->check(CLI::PositiveNumber);
  auto* pde = app.add_subcommand("pde", "run the continuum model");
  add_common(pde);
  pde->add_option("--seed", opt.seed, "seed for the random initial field");
  auto* bridge = app.add_subcommand("bridge", "discrete/continuum consistency studies");
  bridge->add_option("--out", opt.out, "output directory for the error tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    if (*run) return cmd_run(opt);
    if (*sw) return cmd_sweep(opt);
    if (*pde) return cmd_pde(opt);
    if (*bridge) return cmd_bridge(opt);
  } catch (const netadapt::Error& e) {
    return fail(std::string(netadapt::to_string(e.code())), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 1;
}
