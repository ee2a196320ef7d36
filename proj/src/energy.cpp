#include "netadapt/energy.hpp"

#include <cmath>
#include <string>

#include "netadapt/error.hpp"

namespace netadapt {

EnergyParams EnergyParams::hu_cai(double gamma, double nu, MetabolicForm form) {
  return EnergyParams{gamma, nu, 2.0 - gamma, form};
}

void EnergyParams::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorCode::invalid_argument, "gamma must be positive");
  }
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw Error(ErrorCode::invalid_argument, "nu must be positive");
  }
  if (!(alpha > 1.0 - gamma) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::invalid_argument, "alpha must exceed 1 - gamma");
  }
}

KirchhoffOptions ModelOptions::kirchhoff() const {
  KirchhoffOptions k;
  k.length_exponent = length_exponent;
  k.active_threshold = prune_threshold;
  k.tolerance = solve_tolerance;
  k.backend = backend;
  return k;
}

namespace {

// (P_j - P_i) / L_e, the pressure gradient along the edge.
double pressure_slope(const Edge& e, const PressureState& state) {
  return (state.pressures[e.j] - state.pressures[e.i]) / e.length;
}

}  // namespace

EnergyBreakdown energy_from_state(const Network& network, const PressureState& state,
                                  const EnergyParams& params, double prune_threshold) {
  const double k = params.metabolic_coefficient();
  EnergyBreakdown out;
  for (EdgeId id = 0; id < network.num_edges(); ++id) {
    const Edge& e = network.edge(id);
    if (e.conductivity > prune_threshold) {
      // Q^2 / C = C (dP / L)^2, finite for every active edge.
      const double g = pressure_slope(e, state);
      out.pumping += e.conductivity * g * g * e.length;
    }
    if (e.conductivity > 0.0) out.metabolic += k * std::pow(e.conductivity, params.gamma) * e.length;
  }
  return out;
}

EnergyBreakdown discrete_energy(const Network& network, const SourceVector& sources,
                                const EnergyParams& params, const ModelOptions& options) {
  params.validate();
  const auto state = solve_pressures(network, sources, options.kirchhoff());
  return energy_from_state(network, state, params, options.prune_threshold);
}

std::vector<double> energy_gradient_from_state(const Network& network, const PressureState& state,
                                               const EnergyParams& params, double prune_threshold) {
  const double rate = params.metabolic_rate();
  std::vector<double> grad(network.num_edges());
  for (EdgeId id = 0; id < network.num_edges(); ++id) {
    const Edge& e = network.edge(id);
    const double c = e.conductivity;
    if (!(c > prune_threshold) && params.gamma < 1.0) {
      throw Error(ErrorCode::singular_gradient,
                  "gradient requested on edge " + std::to_string(id) +
                      " with vanishing conductivity and gamma < 1");
    }
    const double g = pressure_slope(e, state);
    const double metabolic = c > 0.0 ? rate * std::pow(c, params.gamma - 1.0)
                                     : (params.gamma == 1.0 ? rate : 0.0);
    grad[id] = -(g * g - metabolic) * e.length;
  }
  return grad;
}

std::vector<double> energy_gradient(const Network& network, const SourceVector& sources,
                                    const EnergyParams& params, const ModelOptions& options) {
  params.validate();
  const auto state = solve_pressures(network, sources, options.kirchhoff());
  return energy_gradient_from_state(network, state, params, options.prune_threshold);
}

std::vector<double> flow_velocity(const Network& network, const PressureState& state,
                                  const EnergyParams& params, double prune_threshold) {
  const double rate = params.metabolic_rate();
  std::vector<double> v(network.num_edges(), 0.0);
  for (EdgeId id = 0; id < network.num_edges(); ++id) {
    const Edge& e = network.edge(id);
    const double c = e.conductivity;
    if (!(c > prune_threshold)) continue;
    const double g = pressure_slope(e, state);
    // (Q^2/C - nu C^gamma) C^(alpha-1) L with Q^2/C = C g^2.
    v[id] = (c * g * g - rate * std::pow(c, params.gamma)) * std::pow(c, params.alpha - 1.0) * e.length;
  }
  return v;
}

double dissipation_rate(const Network& network, const SourceVector& sources,
                        const EnergyParams& params, const ModelOptions& options) {
  params.validate();
  const auto state = solve_pressures(network, sources, options.kirchhoff());
  const double rate = params.metabolic_rate();
  double sum = 0.0;
  for (const Edge& e : network.edges()) {
    const double c = e.conductivity;
    if (!(c > options.prune_threshold)) continue;
    const double g = pressure_slope(e, state);
    const double f = c * g * g - rate * std::pow(c, params.gamma);
    sum += f * f * std::pow(c, params.alpha - 2.0) * e.length * e.length;
  }
  return -sum;
}

double weighted_energy(const Network& network, const SourceVector& sources,
                       const EnergyParams& params, double weight, int dimension,
                       const ModelOptions& options) {
  if (!(weight > 0.0)) throw Error(ErrorCode::invalid_argument, "weight must be positive");
  const std::vector<double> w(network.num_edges(), weight);
  return weighted_energy(network, sources, params, w, dimension, options);
}

double weighted_energy(const Network& network, const SourceVector& sources,
                       const EnergyParams& params, std::span<const double> edge_weights,
                       int dimension, const ModelOptions& options) {
  params.validate();
  if (edge_weights.size() != network.num_edges()) {
    throw Error(ErrorCode::invalid_argument, "weight vector has wrong size");
  }
  if (dimension < 1) throw Error(ErrorCode::invalid_argument, "dimension must be at least 1");
  const auto state = solve_pressures(network, sources, options.kirchhoff());
  const double k = params.metabolic_coefficient();
  double sum = 0.0;
  for (EdgeId id = 0; id < network.num_edges(); ++id) {
    const Edge& e = network.edge(id);
    const double wd = std::pow(edge_weights[id], dimension);
    double term = 0.0;
    if (e.conductivity > options.prune_threshold) {
      const double q = state.fluxes[id];
      term += q * q / e.conductivity;
    }
    if (e.conductivity > 0.0) term += k * std::pow(e.conductivity, params.gamma);
    sum += term * wd;
  }
  return sum;
}

}  // namespace netadapt
