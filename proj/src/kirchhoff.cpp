#include "netadapt/kirchhoff.hpp"

#include <cmath>
#include <set>
#include <string>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "netadapt/error.hpp"

namespace netadapt {

namespace {

void check_exponent(int m) {
  if (m != 1 && m != 2) {
    throw Error(ErrorCode::invalid_argument, "length exponent must be 1 or 2");
  }
}

double edge_weight(const Edge& e, int m) {
  return m == 1 ? e.conductivity / e.length : e.conductivity / (e.length * e.length);
}

std::string describe_components(const std::vector<std::vector<VertexId>>& comps) {
  std::string out;
  for (const auto& comp : comps) {
    out += " {";
    for (std::size_t k = 0; k < comp.size(); ++k) {
      if (k) out += ",";
      if (k == 8 && comp.size() > 9) {
        out += "...";
        break;
      }
      out += std::to_string(comp[k]);
    }
    out += "}";
  }
  return out;
}

}  // namespace

LaplacianSystem assemble(const Network& network, int length_exponent, double active_threshold) {
  check_exponent(length_exponent);
  const auto n = static_cast<Eigen::Index>(network.num_vertices());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(4 * network.num_edges());
  for (const Edge& e : network.edges()) {
    if (!(e.conductivity > active_threshold)) continue;
    const double w = edge_weight(e, length_exponent);
    const auto i = static_cast<Eigen::Index>(e.i);
    const auto j = static_cast<Eigen::Index>(e.j);
    triplets.emplace_back(i, i, w);
    triplets.emplace_back(j, j, w);
    triplets.emplace_back(i, j, -w);
    triplets.emplace_back(j, i, -w);
  }
  LaplacianSystem sys;
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  sys.length_exponent = length_exponent;
  return sys;
}

std::vector<double> compute_fluxes(const Network& network, std::span<const double> pressures) {
  if (pressures.size() != network.num_vertices()) {
    throw Error(ErrorCode::invalid_argument, "pressure vector has wrong size");
  }
  std::vector<double> q(network.num_edges());
  for (EdgeId k = 0; k < network.num_edges(); ++k) {
    const Edge& e = network.edge(k);
    q[k] = e.conductivity * (pressures[e.j] - pressures[e.i]) / e.length;
  }
  return q;
}

std::vector<double> node_residual(const Network& network, const SourceVector& sources,
                                  std::span<const double> pressures, int length_exponent,
                                  double active_threshold) {
  check_exponent(length_exponent);
  std::vector<double> r(network.num_vertices());
  for (VertexId v = 0; v < r.size(); ++v) r[v] = -sources[v];
  for (const Edge& e : network.edges()) {
    if (!(e.conductivity > active_threshold)) continue;
    const double w = edge_weight(e, length_exponent) * (pressures[e.j] - pressures[e.i]);
    // row i: sum_j w_ij (P_i - P_j)
    r[e.i] -= w;
    r[e.j] += w;
  }
  return r;
}

PressureState solve_pressures(const Network& network, const SourceVector& sources,
                              const KirchhoffOptions& options) {
  check_exponent(options.length_exponent);
  const std::size_t n = network.num_vertices();
  if (sources.size() != n) {
    throw Error(ErrorCode::invalid_argument, "source vector size does not match the network");
  }
  if (std::abs(sources.total()) > SourceVector::balance_tolerance(sources.values())) {
    throw Error(ErrorCode::incompatible_sources,
                "sources do not balance: total " + std::to_string(sources.total()));
  }

  PressureState state;
  state.pressures.assign(n, 0.0);
  state.fluxes.assign(network.num_edges(), 0.0);
  if (n == 0) return state;

  std::size_t num_components = 0;
  const auto labels = component_labels(network, options.active_threshold, &num_components);

  std::set<std::size_t> support;
  for (VertexId v = 0; v < n; ++v) {
    if (sources[v] != 0.0) support.insert(labels[v]);
  }
  if (support.size() > 1) {
    std::vector<std::vector<VertexId>> comps(num_components);
    for (VertexId v = 0; v < n; ++v) {
      if (support.count(labels[v])) comps[labels[v]].push_back(v);
    }
    std::vector<std::vector<VertexId>> offending;
    for (std::size_t c : support) offending.push_back(comps[c]);
    throw Error(ErrorCode::disconnected_support,
                "sources lie in " + std::to_string(support.size()) +
                    " disconnected components:" + describe_components(offending));
  }
  if (support.empty()) {
    state.ground = options.ground.value_or(n - 1);
    return state;
  }

  const std::size_t label = *support.begin();
  std::vector<VertexId> comp;
  for (VertexId v = 0; v < n; ++v) {
    if (labels[v] == label) comp.push_back(v);
  }
  VertexId ground = comp.back();
  if (options.ground && *options.ground < n && labels[*options.ground] == label) {
    ground = *options.ground;
  }
  state.ground = ground;

  // Local numbering of the component with the ground vertex removed.
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::vector<std::size_t> local(n, npos);
  std::size_t m = 0;
  for (VertexId v : comp) {
    if (v != ground) local[v] = m++;
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  if (m > 0) {
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(m));
    for (VertexId v : comp) {
      if (v != ground) rhs[static_cast<Eigen::Index>(local[v])] = sources[v];
    }

    if (options.backend == SolverBackend::least_squares) {
      // Full singular component system; the minimum-norm least-squares
      // solution is shifted afterwards so the ground vertex sits at zero.
      const auto size = static_cast<Eigen::Index>(comp.size());
      std::vector<std::size_t> full(n, npos);
      for (std::size_t k = 0; k < comp.size(); ++k) full[comp[k]] = k;
      Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(size, size);
      Eigen::VectorXd b(size);
      for (std::size_t k = 0; k < comp.size(); ++k) b[static_cast<Eigen::Index>(k)] = sources[comp[k]];
      for (const Edge& e : network.edges()) {
        if (!(e.conductivity > options.active_threshold)) continue;
        const auto i = static_cast<Eigen::Index>(full[e.i]);
        const auto j = static_cast<Eigen::Index>(full[e.j]);
        const double w = edge_weight(e, options.length_exponent);
        dense(i, i) += w;
        dense(j, j) += w;
        dense(i, j) -= w;
        dense(j, i) -= w;
      }
      const Eigen::VectorXd p = dense.completeOrthogonalDecomposition().solve(b);
      const double shift = p[static_cast<Eigen::Index>(full[ground])];
      for (VertexId v : comp) {
        if (v != ground) x[static_cast<Eigen::Index>(local[v])] = p[static_cast<Eigen::Index>(full[v])] - shift;
      }
    } else {
      std::vector<Eigen::Triplet<double>> triplets;
      triplets.reserve(4 * network.num_edges());
      for (const Edge& e : network.edges()) {
        if (!(e.conductivity > options.active_threshold)) continue;
        const double w = edge_weight(e, options.length_exponent);
        const std::size_t a = local[e.i];
        const std::size_t b = local[e.j];
        if (a != npos) triplets.emplace_back(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a), w);
        if (b != npos) triplets.emplace_back(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b), w);
        if (a != npos && b != npos) {
          triplets.emplace_back(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b), -w);
          triplets.emplace_back(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a), -w);
        }
      }
      Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
      A.setFromTriplets(triplets.begin(), triplets.end());

      if (options.backend == SolverBackend::direct) {
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
        if (ldlt.info() != Eigen::Success) {
          throw Error(ErrorCode::solver_failure, "LDL^T factorisation of the Kirchhoff system failed");
        }
        x = ldlt.solve(rhs);
      } else {
        Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                                 Eigen::DiagonalPreconditioner<double>>
            cg;
        cg.setTolerance(std::min(options.tolerance, 1e-12));
        cg.setMaxIterations(std::max<Eigen::Index>(10 * A.rows(), 1000));
        cg.compute(A);
        x = cg.solve(rhs);
        if (cg.info() != Eigen::Success && cg.info() != Eigen::NoConvergence) {
          throw Error(ErrorCode::solver_failure, "conjugate gradient failed on the Kirchhoff system");
        }
      }
    }
  }

  for (VertexId v : comp) {
    if (v != ground) state.pressures[v] = x[static_cast<Eigen::Index>(local[v])];
  }
  for (double p : state.pressures) {
    if (!std::isfinite(p)) throw Error(ErrorCode::non_finite, "non-finite pressure in Kirchhoff solve");
  }

  for (EdgeId k = 0; k < network.num_edges(); ++k) {
    const Edge& e = network.edge(k);
    if (e.conductivity > options.active_threshold) {
      state.fluxes[k] = e.conductivity * (state.pressures[e.j] - state.pressures[e.i]) / e.length;
    }
  }

  const auto r = node_residual(network, sources, state.pressures, options.length_exponent,
                               options.active_threshold);
  double rr = 0.0;
  for (double v : r) rr += v * v;
  state.residual = std::sqrt(rr);
  if (state.residual > options.tolerance * sources.l2_norm()) {
    throw Error(ErrorCode::solver_failure,
                "Kirchhoff residual " + std::to_string(state.residual) + " above tolerance");
  }
  return state;
}

}  // namespace netadapt
