#pragma once

#include <span>
#include <vector>

#include "netadapt/kirchhoff.hpp"
#include "netadapt/network.hpp"

namespace netadapt {

/// Prefactor of the metabolic term C^gamma.
enum class MetabolicForm {
  nu_over_gamma,  ///< (nu / gamma) C^gamma, the graph model's energy
  nu,             ///< nu C^gamma, the objective of the minimisation scheme
};

struct EnergyParams {
  double gamma = 0.5;
  double nu = 1.0;
  double alpha = 1.5;
  MetabolicForm form = MetabolicForm::nu_over_gamma;

  /// alpha = 2 - gamma.
  static EnergyParams hu_cai(double gamma, double nu = 1.0,
                             MetabolicForm form = MetabolicForm::nu_over_gamma);

  /// Throws invalid_argument unless gamma > 0, nu > 0 and alpha > 1 - gamma.
  void validate() const;

  /// Coefficient k in k C^gamma.
  double metabolic_coefficient() const { return form == MetabolicForm::nu ? nu : nu / gamma; }

  /// d/dC (k C^gamma) = metabolic_rate() C^(gamma-1).
  double metabolic_rate() const { return metabolic_coefficient() * gamma; }
};

struct EnergyBreakdown {
  double pumping = 0.0;
  double metabolic = 0.0;

  double total() const { return pumping + metabolic; }
};

/// Options shared by everything that solves the Kirchhoff law for an energy
/// evaluation. Edges at or below prune_threshold carry no flux.
struct ModelOptions {
  int length_exponent = 1;
  double prune_threshold = 1e-12;
  double solve_tolerance = 1e-10;
  SolverBackend backend = SolverBackend::direct;

  KirchhoffOptions kirchhoff() const;
};

/// Energy of a network for an already solved pressure state.
EnergyBreakdown energy_from_state(const Network& network, const PressureState& state,
                                  const EnergyParams& params, double prune_threshold);

/// sum_e (Q_e^2 / C_e + k C_e^gamma) L_e with a fresh Kirchhoff solve.
EnergyBreakdown discrete_energy(const Network& network, const SourceVector& sources,
                                const EnergyParams& params, const ModelOptions& options = {});

/// dE/dC_e = -(Q_e^2 / C_e^2 - k gamma C_e^(gamma-1)) L_e for every edge.
///
/// This is the exact gradient of the constrained energy for length exponent 1.
/// With length exponent 2 it is exact only when all lengths are equal.
///
/// Q_e^2 / C_e^2 is evaluated as ((P_j - P_i) / L_e)^2, which stays finite on
/// pruned edges. Throws singular_gradient if an edge is at or below the prune
/// threshold and gamma < 1.
std::vector<double> energy_gradient(const Network& network, const SourceVector& sources,
                                    const EnergyParams& params, const ModelOptions& options = {});

std::vector<double> energy_gradient_from_state(const Network& network, const PressureState& state,
                                               const EnergyParams& params, double prune_threshold);

/// Right-hand side of dC/dt = (Q^2/C - nu C^gamma) C^(alpha-1) L on active
/// edges; zero on pruned edges.
std::vector<double> flow_velocity(const Network& network, const PressureState& state,
                                  const EnergyParams& params, double prune_threshold);

/// dE/dt = -sum_e (Q^2/C - nu C^gamma)^2 C^(alpha-2) L^2 over active edges.
double dissipation_rate(const Network& network, const SourceVector& sources,
                        const EnergyParams& params, const ModelOptions& options = {});

/// sum_e (Q_e^2 / C_e + k C_e^gamma) W^d with a uniform weight W.
double weighted_energy(const Network& network, const SourceVector& sources,
                       const EnergyParams& params, double weight, int dimension,
                       const ModelOptions& options = {});

/// Same with a per-edge weight W_e (the sum uses W_e^d).
double weighted_energy(const Network& network, const SourceVector& sources,
                       const EnergyParams& params, std::span<const double> edge_weights,
                       int dimension, const ModelOptions& options = {});

}  // namespace netadapt
