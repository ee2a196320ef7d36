#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "netadapt/energy.hpp"
#include "netadapt/kirchhoff.hpp"
#include "netadapt/network.hpp"

namespace netadapt {

enum class StepMode {
  explicit_euler,  ///< forward Euler on the gradient flow, clamped at zero
  proximal,        ///< minimisation step with a |C - C_prev|^2 / (2 tau) penalty
};

/// Per-edge model used inside the proximal step.
enum class ProxModel {
  /// Fluxes frozen at Q_prev = C_prev dP / L, pumping term Q_prev^2 L / c.
  /// A majorizer of the true energy, so every step decreases it.
  frozen_flux,
  /// Pressures frozen, pumping term linearised as -c dP^2 / L.
  frozen_pressure,
};

enum class Termination { energy_converged, max_iters, error };

std::string_view to_string(StepMode mode) noexcept;
std::string_view to_string(ProxModel model) noexcept;
std::string_view to_string(Termination reason) noexcept;

struct DynamicsConfig {
  double tau = 0.025;
  double tol = 1e-6;
  double prune_threshold = 1e-12;
  std::size_t max_iters = 20000;
  StepMode mode = StepMode::proximal;
  ProxModel prox_model = ProxModel::frozen_flux;
  double armijo_shrink = 0.5;
  double armijo_sigma = 1e-4;
  /// Trial step of the next iteration is min(tau_max, tau_growth * accepted).
  /// With tau_growth = 1 every iteration starts again from tau.
  double tau_growth = 2.0;
  double tau_max = 1e12;
  /// Also require max |C - C_prev| / tau <= tol before stopping.
  bool step_criterion = false;
  /// Compare the frozen-flux objective instead of the re-solved energy in
  /// the stopping rule.
  bool frozen_energy_criterion = false;
  /// Store a conductivity snapshot every k iterations (0: first and last only).
  std::size_t snapshot_every = 0;
  int length_exponent = 1;
  SolverBackend backend = SolverBackend::direct;
  double solve_tolerance = 1e-10;
  EnergyParams energy;

  void validate() const;
  ModelOptions model() const;
};

struct PruneEvent {
  std::size_t iter = 0;
  EdgeId edge = 0;
};

struct TrajectoryRecord {
  std::size_t iter = 0;
  EnergyBreakdown energy;
  double tau = 0.0;  ///< accepted step (0 for the initial state)
  std::size_t n_active = 0;
  std::size_t n_cycles = 0;
  std::vector<double> conductivities;  ///< empty unless a snapshot was taken
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  std::vector<PruneEvent> prune_events;
  Termination termination = Termination::max_iters;
  std::string error_message;
  std::size_t iterations = 0;
  std::size_t backtracks = 0;
  Network final_network;
};

struct StepResult {
  Network network;
  PressureState state;
  EnergyBreakdown energy;
  double tau = 0.0;
  std::size_t backtracks = 0;
  /// The step could not move the state beyond rounding level.
  bool stationary = false;
};

/// One forward Euler step C += tau (Q^2/C - nu C^gamma) C^(alpha-1) L on
/// active edges, clamped at zero. Inactive edges are left unchanged.
Network explicit_step(const Network& network, const PressureState& state,
                      const DynamicsConfig& config);
Network explicit_step(const Network& network, const SourceVector& sources,
                      const DynamicsConfig& config);

/// Minimiser of (c - c_prev)^2 / (2 tau) + pumping(c) + k c^gamma L over
/// c >= 0 for a single edge, where pumping is a / c (frozen flux, a = Q^2 L)
/// or -g c (frozen pressure, g = dP^2 / L). Picks the global minimiser among
/// the stationary points and c = 0.
double prox_scalar(double c_prev, double a, double g, double k, double gamma, double length,
                   double tau);

/// Proximal step for every active edge from the pressures of Step 1.
Network proximal_step(const Network& network_prev, const PressureState& state,
                      const DynamicsConfig& config);

/// Backtracks tau until E[C_new] <= E[C_prev] - sigma |C_new - C_prev|^2 / tau.
/// Trials whose active support disconnects the sources count as +inf.
/// Throws step_failure when tau drops below 1e-14.
StepResult armijo_select_tau(const Network& network, const SourceVector& sources,
                             const DynamicsConfig& config, double tau_init);
StepResult armijo_select_tau(const Network& network, const SourceVector& sources,
                             const DynamicsConfig& config, double tau_init,
                             const PressureState& state, const EnergyBreakdown& energy);

struct PruneResult {
  Network network;
  std::vector<EdgeId> removed;
};

/// Sets C = 0 on edges at or below the threshold (edge ids stay stable) and
/// re-checks that the vertices with nonzero sources stay connected; throws
/// connectivity_violation otherwise.
PruneResult prune_edges(const Network& network, double prune_threshold,
                        const SourceVector& sources);

/// Runs Step 1 (pressures), Step 2 (conductivity step), pruning and the
/// stopping test |E_tau[C] - E[C_prev]| <= tol until convergence or
/// max_iters. Errors are returned in the trajectory, not thrown.
Trajectory run_to_steady_state(const Network& network, const SourceVector& sources,
                               const DynamicsConfig& config);

struct CutBound {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double u0 = 0.0;
  double bound = 0.0;
};

/// Lower bound min{u0, (kappa1/kappa2)^(1/(gamma+1))} on the total conductivity
/// of the cut edges. Requires 0 < gamma + alpha - 1 < 1 and a nonzero cut flux.
CutBound cut_bound(const Network& network, const CutPartition& partition,
                   const SourceVector& sources, const EnergyParams& params);

}  // namespace netadapt
