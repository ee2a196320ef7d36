#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "netadapt/continuum.hpp"
#include "netadapt/dynamics.hpp"
#include "netadapt/geometry.hpp"

namespace netadapt {

/// One discrete-model run. See README for the JSON schema.
struct ScenarioConfig {
  std::string name = "scenario";
  std::string preset = "small-diamond";  ///< used when network_file is empty
  std::filesystem::path network_file;
  /// Explicit sources; empty means the exponential source/uniform sink rule.
  std::vector<double> sources;
  DynamicsConfig dynamics;
  InitSpec init;
  /// Keep the conductivities of the network file instead of init.
  bool keep_file_conductivities = false;
  std::filesystem::path output_dir;  ///< empty: nothing written
};

/// Defaults: nu C^gamma metabolic term, alpha = 2 - gamma, m = 2, tau = 0.025,
/// tol = 1e-6, tau growth 2, tree initialisation with delta = 5.
ScenarioConfig default_scenario();

/// Parses a JSON object on top of default_scenario(). Relative paths are
/// resolved against base_dir. Throws config_error.
ScenarioConfig parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Sweep file: a JSON array of scenarios, or {"base": {...}, "scenarios": [...]}
/// where each entry is merged over base.
std::vector<ScenarioConfig> load_sweep(const std::filesystem::path& path);

struct Report {
  std::string name;
  bool ok = false;
  std::string error_code;
  std::string error_message;
  Network initial_network;
  Network final_network;
  Trajectory trajectory;
  std::size_t n_cycles = 0;
  std::size_t n_active_edges = 0;
  std::string classification;  ///< "tree" or "network with k cycles"
  double max_conductivity = 0.0;
  EnergyBreakdown final_energy;
  double wall_seconds = 0.0;
};

/// Builds the network, sources and initial state for a config.
Network scenario_network(const ScenarioConfig& config);
SourceVector scenario_sources(const ScenarioConfig& config, const Network& network);

/// Runs one scenario; errors are captured in the report. Writes
/// trajectory.csv, network.csv, plot.csv, prune_events.csv and report.json
/// when output_dir is set.
Report run_scenario(const ScenarioConfig& config);

/// Runs every scenario on up to `parallelism` threads. Results are in input
/// order and do not depend on the schedule.
std::vector<Report> sweep(const std::vector<ScenarioConfig>& configs, unsigned parallelism);

std::string report_json(const Report& report);

/// Continuum run configuration.
struct PDERunConfig {
  std::string name = "pde";
  GridSpec grid;
  PDEConfig pde;
  double r = 1.0;
  /// "random" (uniform in [0, amplitude) from seed) or "constant".
  std::string initial = "random";
  double initial_amplitude = 1.0;
  std::uint64_t seed = 1;
  /// "dipole": a Gaussian source and sink; "cosine": prod_k cos(pi x_k); "zero".
  std::string sources = "dipole";
  double source_amplitude = 10.0;
  std::size_t snapshot_every = 0;  ///< 0: initial and final only
  std::filesystem::path output_dir;
};

PDERunConfig parse_pde_config(const std::string& json_text);
DiagonalTensorField pde_initial_field(const PDERunConfig& config);
std::vector<double> pde_sources(const PDERunConfig& config);

/// Runs the PDE, writes energy.csv, field snapshots, manifest.json and
/// report.json when output_dir is set, and returns the report as JSON.
std::string run_pde_scenario(const PDERunConfig& config);

/// Consistency studies with the default grid sequences; writes the error
/// tables and report.json to output_dir (if set) and returns the report.
std::string run_bridge_studies(const std::filesystem::path& output_dir,
                               const std::vector<int>& cells = {16, 32, 64});

}  // namespace netadapt
