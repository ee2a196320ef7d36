#include "netadapt/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "netadapt/error.hpp"

namespace netadapt {

std::string_view to_string(StepMode mode) noexcept {
  return mode == StepMode::explicit_euler ? "explicit" : "proximal";
}

std::string_view to_string(ProxModel model) noexcept {
  return model == ProxModel::frozen_flux ? "frozen_flux" : "frozen_pressure";
}

std::string_view to_string(Termination reason) noexcept {
  switch (reason) {
    case Termination::energy_converged: return "energy_converged";
    case Termination::max_iters: return "max_iters";
    case Termination::error: return "error";
  }
  return "unknown";
}

void DynamicsConfig::validate() const {
  energy.validate();
  if (!(tau > 0.0)) throw Error(ErrorCode::invalid_argument, "tau must be positive");
  if (!(tol > 0.0)) throw Error(ErrorCode::invalid_argument, "tol must be positive");
  if (!(prune_threshold >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "prune threshold must be nonnegative");
  }
  if (!(armijo_shrink > 0.0 && armijo_shrink < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "Armijo shrink factor must lie in (0, 1)");
  }
  if (!(armijo_sigma > 0.0 && armijo_sigma < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "Armijo decrease constant must lie in (0, 1)");
  }
  if (!(tau_growth >= 1.0)) throw Error(ErrorCode::invalid_argument, "tau growth must be >= 1");
  if (!(tau_max >= tau)) throw Error(ErrorCode::invalid_argument, "tau_max must be >= tau");
  if (length_exponent != 1 && length_exponent != 2) {
    throw Error(ErrorCode::invalid_argument, "length exponent must be 1 or 2");
  }
}

ModelOptions DynamicsConfig::model() const {
  ModelOptions m;
  m.length_exponent = length_exponent;
  m.prune_threshold = prune_threshold;
  m.solve_tolerance = solve_tolerance;
  m.backend = backend;
  return m;
}

// ---------------------------------------------------------------------------

Network explicit_step(const Network& network, const PressureState& state,
                      const DynamicsConfig& config) {
  const auto v = flow_velocity(network, state, config.energy, config.prune_threshold);
  std::vector<double> c = network.conductivities();
  for (EdgeId e = 0; e < c.size(); ++e) {
    if (!(c[e] > config.prune_threshold)) continue;
    c[e] = std::max(0.0, c[e] + config.tau * v[e]);
  }
  return network.with_conductivities(c);
}

Network explicit_step(const Network& network, const SourceVector& sources,
                      const DynamicsConfig& config) {
  const auto state = solve_pressures(network, sources, config.model().kirchhoff());
  return explicit_step(network, state, config);
}

namespace {

struct ScalarObjective {
  double c_prev, a, g, b, gamma, tau;

  double value(double c) const {
    double f = (c - c_prev) * (c - c_prev) / (2.0 * tau) - g * c;
    if (a > 0.0) f += a / c;
    if (c > 0.0) f += b * std::pow(c, gamma);
    return f;
  }

  double slope(double c) const {
    double d = (c - c_prev) / tau - g - a / (c * c);
    if (c > 0.0) d += b * gamma * std::pow(c, gamma - 1.0);
    return d;
  }
};

// Root of the slope in [lo, hi] with slope(lo) < 0 <= slope(hi), by bisection
// on a log scale followed by a linear bisection.
double bisect(const ScalarObjective& f, double lo, double hi) {
  for (int k = 0; k < 200 && hi > lo * (1.0 + 1e-15); ++k) {
    const double mid = hi > 4.0 * lo ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    if (f.slope(mid) < 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double prox_scalar(double c_prev, double a, double g, double k, double gamma, double length,
                   double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::invalid_argument, "tau must be positive");
  if (!std::isfinite(a) || !std::isfinite(g) || !std::isfinite(c_prev)) {
    throw Error(ErrorCode::non_finite, "non-finite input to the proximal step");
  }
  const ScalarObjective f{c_prev, a, g, k * length, gamma, tau};

  double hi = std::max(1.0, c_prev) + tau * std::max(g, 0.0) + std::cbrt(a * tau) + 1.0;
  while (f.slope(hi) < 0.0) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw Error(ErrorCode::non_finite, "proximal step diverged");
  }

  std::vector<double> candidates;
  if (a == 0.0) candidates.push_back(0.0);

  if (gamma >= 1.0) {
    // Convex: a single sign change of the slope on (0, hi].
    const double lo = 1e-300;
    if (f.slope(lo) >= 0.0) {
      candidates.push_back(a == 0.0 ? 0.0 : lo);
    } else {
      candidates.push_back(bisect(f, lo, hi));
    }
  } else {
    // c^gamma is concave, so several local minima can exist. Scan the slope
    // on a log grid and refine every - to + sign change.
    constexpr int kPoints = 600;
    const double lo = 1e-250;
    const double ratio = std::pow(hi / lo, 1.0 / kPoints);
    double x0 = lo;
    double s0 = f.slope(x0);
    if (s0 >= 0.0 && a > 0.0) candidates.push_back(lo);
    for (int i = 1; i <= kPoints; ++i) {
      const double x1 = i == kPoints ? hi : x0 * ratio;
      const double s1 = f.slope(x1);
      if (s0 < 0.0 && s1 >= 0.0) candidates.push_back(bisect(f, x0, x1));
      x0 = x1;
      s0 = s1;
    }
  }
  if (candidates.empty()) candidates.push_back(hi);

  double best = candidates.front();
  double best_value = f.value(best);
  for (double c : candidates) {
    const double v = f.value(c);
    if (v < best_value) {
      best = c;
      best_value = v;
    }
  }
  return best;
}

Network proximal_step(const Network& network_prev, const PressureState& state,
                      const DynamicsConfig& config) {
  if (state.pressures.size() != network_prev.num_vertices()) {
    throw Error(ErrorCode::invalid_argument, "pressure vector has wrong size");
  }
  for (double p : state.pressures) {
    if (!std::isfinite(p)) throw Error(ErrorCode::non_finite, "non-finite pressure in proximal step");
  }
  const double k = config.energy.metabolic_coefficient();
  std::vector<double> c = network_prev.conductivities();
  for (EdgeId id = 0; id < c.size(); ++id) {
    if (!(c[id] > config.prune_threshold)) continue;
    const Edge& e = network_prev.edge(id);
    const double slope = (state.pressures[e.j] - state.pressures[e.i]) / e.length;
    double a = 0.0;
    double g = 0.0;
    if (config.prox_model == ProxModel::frozen_flux) {
      const double q = c[id] * slope;
      a = q * q * e.length;
    } else {
      g = slope * slope * e.length;
    }
    c[id] = prox_scalar(c[id], a, g, k, config.energy.gamma, e.length, config.tau);
  }
  return network_prev.with_conductivities(c);
}

// ---------------------------------------------------------------------------

namespace {

bool sources_connected(const Network& network, double threshold, const SourceVector& sources) {
  const auto labels = component_labels(network, threshold);
  std::set<std::size_t> seen;
  for (VertexId v = 0; v < network.num_vertices(); ++v) {
    if (sources[v] != 0.0) seen.insert(labels[v]);
  }
  return seen.size() <= 1;
}

Network zero_pruned(const Network& network, double threshold) {
  std::vector<double> c = network.conductivities();
  for (double& x : c) {
    if (!(x > threshold)) x = 0.0;
  }
  return network.with_conductivities(c);
}

}  // namespace

PruneResult prune_edges(const Network& network, double prune_threshold,
                        const SourceVector& sources) {
  PruneResult out;
  std::vector<double> c = network.conductivities();
  for (EdgeId e = 0; e < c.size(); ++e) {
    if (c[e] > 0.0 && !(c[e] > prune_threshold)) {
      c[e] = 0.0;
      out.removed.push_back(e);
    }
  }
  out.network = network.with_conductivities(c);
  if (sources.size() != network.num_vertices()) {
    throw Error(ErrorCode::invalid_argument, "source vector size does not match the network");
  }
  if (!sources_connected(out.network, prune_threshold, sources)) {
    throw Error(ErrorCode::connectivity_violation,
                "pruning disconnected vertices that carry nonzero sources");
  }
  return out;
}

StepResult armijo_select_tau(const Network& network, const SourceVector& sources,
                             const DynamicsConfig& config, double tau_init) {
  const auto model = config.model();
  const auto state = solve_pressures(network, sources, model.kirchhoff());
  const auto energy = energy_from_state(network, state, config.energy, config.prune_threshold);
  return armijo_select_tau(network, sources, config, tau_init, state, energy);
}

StepResult armijo_select_tau(const Network& network, const SourceVector& sources,
                             const DynamicsConfig& config, double tau_init,
                             const PressureState& state, const EnergyBreakdown& energy) {
  if (!(tau_init > 0.0)) throw Error(ErrorCode::invalid_argument, "initial tau must be positive");
  const auto model = config.model();
  const auto c_prev = network.conductivities();
  double scale = 0.0;
  for (double x : c_prev) scale = std::max(scale, x);
  const double e_prev = energy.total();

  DynamicsConfig trial_config = config;
  StepResult out;
  double tau = tau_init;
  for (;;) {
    if (tau < 1e-14) {
      throw Error(ErrorCode::step_failure,
                  "Armijo backtracking reduced tau below 1e-14 without sufficient decrease");
    }
    trial_config.tau = tau;
    Network trial = config.mode == StepMode::proximal ? proximal_step(network, state, trial_config)
                                                      : explicit_step(network, state, trial_config);
    trial = zero_pruned(trial, config.prune_threshold);

    double diff2 = 0.0;
    double max_diff = 0.0;
    for (EdgeId e = 0; e < c_prev.size(); ++e) {
      const double d = trial.edge(e).conductivity - c_prev[e];
      diff2 += d * d;
      max_diff = std::max(max_diff, std::abs(d));
    }
    if (max_diff <= 1e-13 * scale) {
      out.network = network;
      out.state = state;
      out.energy = energy;
      out.tau = tau;
      out.stationary = true;
      return out;
    }

    double e_new = std::numeric_limits<double>::infinity();
    PressureState trial_state;
    EnergyBreakdown trial_energy;
    try {
      trial_state = solve_pressures(trial, sources, model.kirchhoff());
      trial_energy = energy_from_state(trial, trial_state, config.energy, config.prune_threshold);
      e_new = trial_energy.total();
    } catch (const Error& err) {
      if (err.code() != ErrorCode::disconnected_support) throw;
    }
    if (std::isfinite(e_new) && e_new <= e_prev - config.armijo_sigma * diff2 / tau) {
      out.network = std::move(trial);
      out.state = std::move(trial_state);
      out.energy = trial_energy;
      out.tau = tau;
      return out;
    }
    tau *= config.armijo_shrink;
    ++out.backtracks;
  }
}

// ---------------------------------------------------------------------------

namespace {

TrajectoryRecord make_record(std::size_t iter, const Network& net, const EnergyBreakdown& energy,
                             double tau, double threshold, bool snapshot) {
  TrajectoryRecord r;
  r.iter = iter;
  r.energy = energy;
  r.tau = tau;
  r.n_active = active_edge_count(net, threshold);
  r.n_cycles = cycle_count(net, threshold);
  if (snapshot) r.conductivities = net.conductivities();
  return r;
}

// Objective of the proximal step with the fluxes of the previous state.
double frozen_objective(const Network& prev, const PressureState& state, const Network& next,
                        const DynamicsConfig& config, double tau) {
  const double k = config.energy.metabolic_coefficient();
  double sum = 0.0;
  for (EdgeId id = 0; id < prev.num_edges(); ++id) {
    const Edge& e = prev.edge(id);
    const double c = next.edge(id).conductivity;
    const double d = c - e.conductivity;
    sum += d * d / (2.0 * tau);
    if (e.conductivity > config.prune_threshold && c > 0.0) {
      const double q = state.fluxes[id];
      sum += q * q * e.length / c;
    }
    if (c > 0.0) sum += k * std::pow(c, config.energy.gamma) * e.length;
  }
  return sum;
}

}  // namespace

Trajectory run_to_steady_state(const Network& network, const SourceVector& sources,
                               const DynamicsConfig& config) {
  config.validate();
  Trajectory traj;
  traj.final_network = network;
  std::size_t iter = 0;
  try {
    const auto model = config.model();
    Network net = network;
    PressureState state = solve_pressures(net, sources, model.kirchhoff());
    EnergyBreakdown energy = energy_from_state(net, state, config.energy, config.prune_threshold);
    traj.records.push_back(make_record(0, net, energy, 0.0, config.prune_threshold, true));

    double tau = config.tau;
    for (iter = 1; iter <= config.max_iters; ++iter) {
      StepResult step = armijo_select_tau(net, sources, config, tau, state, energy);
      traj.backtracks += step.backtracks;
      if (step.stationary) {
        traj.termination = Termination::energy_converged;
        break;
      }

      double diff2 = 0.0;
      double max_diff = 0.0;
      for (EdgeId e = 0; e < net.num_edges(); ++e) {
        const double before = net.edge(e).conductivity;
        const double after = step.network.edge(e).conductivity;
        const double d = after - before;
        diff2 += d * d;
        max_diff = std::max(max_diff, std::abs(d));
        if (before > config.prune_threshold && !(after > config.prune_threshold)) {
          traj.prune_events.push_back({iter, e});
        }
      }

      const double regularised =
          config.frozen_energy_criterion
              ? frozen_objective(net, state, step.network, config, step.tau)
              : step.energy.total() + diff2 / (2.0 * step.tau);
      const double gap = std::abs(regularised - energy.total());

      net = std::move(step.network);
      state = std::move(step.state);
      energy = step.energy;
      traj.iterations = iter;
      const bool snapshot = config.snapshot_every > 0 && iter % config.snapshot_every == 0;
      traj.records.push_back(
          make_record(iter, net, energy, step.tau, config.prune_threshold, snapshot));

      // With a growing step the energy gap is only meaningful once tau has
      // reached its cap; small early steps barely move the state.
      const bool at_cap = config.tau_growth <= 1.0 || step.tau >= config.tau_max * (1.0 - 1e-12);
      bool converged = at_cap && gap <= config.tol;
      if (config.step_criterion) converged = converged && max_diff / step.tau <= config.tol;
      if (converged) {
        traj.termination = Termination::energy_converged;
        break;
      }
      tau = config.tau_growth > 1.0 ? std::min(config.tau_max, config.tau_growth * step.tau)
                                    : config.tau;
    }
    if (iter > config.max_iters) traj.termination = Termination::max_iters;
    traj.final_network = net;
    if (traj.records.back().conductivities.empty()) {
      traj.records.back().conductivities = net.conductivities();
    }
  } catch (const Error& err) {
    traj.termination = Termination::error;
    traj.error_message = "iteration " + std::to_string(iter) + ": " +
                         std::string(to_string(err.code())) + ": " + err.what();
  }
  return traj;
}

// ---------------------------------------------------------------------------

CutBound cut_bound(const Network& network, const CutPartition& partition,
                   const SourceVector& sources, const EnergyParams& params) {
  params.validate();
  const double exponent = params.gamma + params.alpha - 1.0;
  if (!(exponent > 0.0 && exponent < 1.0)) {
    throw Error(ErrorCode::bound_not_applicable, "cut bound requires 0 < gamma + alpha - 1 < 1");
  }
  const double ds = cut_flux(network, partition, sources);
  if (std::abs(ds) <= SourceVector::balance_tolerance(sources.values())) {
    throw Error(ErrorCode::bound_not_applicable, "cut flux vanishes");
  }
  const auto cut = partition.cut_edges(network);
  if (cut.empty()) {
    throw Error(ErrorCode::bound_not_applicable, "partition has no cut edges");
  }
  double min_length = std::numeric_limits<double>::infinity();
  double sum_length = 0.0;
  double u0 = 0.0;
  for (EdgeId e : cut) {
    const Edge& ed = network.edge(e);
    min_length = std::min(min_length, ed.length);
    sum_length += ed.length;
    u0 += ed.conductivity;
  }
  const double n = static_cast<double>(cut.size());
  CutBound b;
  b.kappa1 = ds * ds / (n * n) * min_length;
  b.kappa2 = params.metabolic_rate() * sum_length;
  b.u0 = u0;
  b.bound = std::min(u0, std::pow(b.kappa1 / b.kappa2, 1.0 / (params.gamma + 1.0)));
  return b;
}

}  // namespace netadapt
