#include "netadapt/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "netadapt/error.hpp"

namespace netadapt {

GridSpec GridSpec::unit(int dim, int cells_per_axis) {
  GridSpec g;
  g.dim = dim;
  g.cells = {cells_per_axis, dim == 2 ? cells_per_axis : 0};
  if (dim == 1) g.upper[1] = g.lower[1];
  return g;
}

void GridSpec::validate() const {
  if (dim != 1 && dim != 2) throw Error(ErrorCode::invalid_argument, "grid dimension must be 1 or 2");
  for (int k = 0; k < dim; ++k) {
    if (cells[k] < 1) throw Error(ErrorCode::invalid_argument, "grid needs at least one cell per axis");
    if (!(upper[k] > lower[k])) throw Error(ErrorCode::invalid_argument, "grid bounds must be increasing");
  }
}

double GridSpec::cell_volume() const {
  double w = 1.0;
  for (int k = 0; k < dim; ++k) w *= h(k);
  return w;
}

std::size_t GridSpec::num_nodes() const {
  return static_cast<std::size_t>(cells[0] + 1) * static_cast<std::size_t>(dim == 2 ? cells[1] + 1 : 1);
}

std::size_t GridSpec::num_edges(int k) const {
  const std::size_t ny = dim == 2 ? static_cast<std::size_t>(cells[1]) : 0;
  if (k == 0) return static_cast<std::size_t>(cells[0]) * (ny + 1);
  if (k == 1 && dim == 2) return static_cast<std::size_t>(cells[0] + 1) * ny;
  return 0;
}

std::array<double, 2> GridSpec::node_position(std::size_t node) const {
  const auto nx1 = static_cast<std::size_t>(cells[0] + 1);
  const double i = static_cast<double>(node % nx1);
  const double j = static_cast<double>(node / nx1);
  return {lower[0] + i * h(0), dim == 2 ? lower[1] + j * h(1) : lower[1]};
}

std::array<std::size_t, 2> GridSpec::edge_nodes(int k, std::size_t edge) const {
  if (k == 0) {
    const auto nx = static_cast<std::size_t>(cells[0]);
    const int i = static_cast<int>(edge % nx);
    const int j = static_cast<int>(edge / nx);
    return {node_id(i, j), node_id(i + 1, j)};
  }
  const auto nx1 = static_cast<std::size_t>(cells[0] + 1);
  const int i = static_cast<int>(edge % nx1);
  const int j = static_cast<int>(edge / nx1);
  return {node_id(i, j), node_id(i, j + 1)};
}

std::array<double, 2> GridSpec::edge_midpoint(int k, std::size_t edge) const {
  const auto n = edge_nodes(k, edge);
  const auto a = node_position(n[0]);
  const auto b = node_position(n[1]);
  return {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
}

bool GridSpec::edge_on_boundary(int k, std::size_t edge) const {
  if (dim == 1) return false;
  if (k == 0) {
    const std::size_t j = edge / static_cast<std::size_t>(cells[0]);
    return j == 0 || j == static_cast<std::size_t>(cells[1]);
  }
  const std::size_t i = edge % static_cast<std::size_t>(cells[0] + 1);
  return i == 0 || i == static_cast<std::size_t>(cells[0]);
}

double GridSpec::edge_weight(int k, std::size_t edge) const {
  return edge_on_boundary(k, edge) ? 0.5 : 1.0;
}

double GridSpec::node_weight(std::size_t node) const {
  const auto nx1 = static_cast<std::size_t>(cells[0] + 1);
  const std::size_t i = node % nx1;
  const std::size_t j = node / nx1;
  double w = 1.0;
  if (i == 0 || i == static_cast<std::size_t>(cells[0])) w *= 0.5;
  if (dim == 2 && (j == 0 || j == static_cast<std::size_t>(cells[1]))) w *= 0.5;
  return w;
}

DiagonalTensorField make_field(const GridSpec& grid,
                               const std::function<double(int, double, double)>& c_fn,
                               double r_value, bool dirichlet) {
  grid.validate();
  DiagonalTensorField f;
  for (int k = 0; k < grid.dim; ++k) {
    const std::size_t m = grid.num_edges(k);
    f.c[k].assign(m, 0.0);
    f.r[k].assign(m, r_value);
    for (std::size_t e = 0; e < m; ++e) {
      if (dirichlet && grid.edge_on_boundary(k, e)) continue;
      const auto x = grid.edge_midpoint(k, e);
      f.c[k][e] = c_fn(k, x[0], x[1]);
    }
  }
  return f;
}

std::vector<double> sample_nodes(const GridSpec& grid, const std::function<double(double, double)>& fn) {
  std::vector<double> s(grid.num_nodes());
  for (std::size_t v = 0; v < s.size(); ++v) {
    const auto x = grid.node_position(v);
    s[v] = fn(x[0], x[1]);
  }
  return s;
}

namespace {

void check_field(const DiagonalTensorField& field, const GridSpec& grid) {
  for (int k = 0; k < grid.dim; ++k) {
    if (field.c[k].size() != grid.num_edges(k) || field.r[k].size() != grid.num_edges(k)) {
      throw Error(ErrorCode::invalid_argument, "field does not match the grid");
    }
    for (double v : field.c[k]) {
      if (!std::isfinite(v)) throw Error(ErrorCode::non_finite, "non-finite conductivity field");
    }
  }
}

// Signed power |c|^(gamma-2) c, zero at c = 0.
double decay(double c, double gamma) {
  if (c == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(c), gamma - 1.0), c);
}

// Flat index of all edge unknowns: direction 0 first, then direction 1.
struct EdgeIndex {
  std::size_t offset1;
  std::size_t total;
};

EdgeIndex edge_index(const GridSpec& grid) {
  return {grid.num_edges(0), grid.num_edges(0) + grid.num_edges(1)};
}

// Neighbour of edge e (direction k) shifted by +-1 along axis a, or npos.
constexpr std::size_t npos = static_cast<std::size_t>(-1);

std::size_t shifted_edge(const GridSpec& grid, int k, std::size_t e, int a, int s) {
  const int nx = grid.cells[0];
  const int ny = grid.dim == 2 ? grid.cells[1] : 0;
  const int width = k == 0 ? nx : nx + 1;
  const int height = k == 0 ? ny + 1 : ny;
  int i = static_cast<int>(e % static_cast<std::size_t>(width));
  int j = static_cast<int>(e / static_cast<std::size_t>(width));
  if (a == 0) i += s;
  else j += s;
  if (i < 0 || i >= width || j < 0 || j >= height) return npos;
  return static_cast<std::size_t>(i + width * j);
}

// Sparse Laplacian over all edge unknowns. Rows of fixed (boundary) edges are
// empty; a missing neighbour acts as a ghost value -c (zero at the boundary).
Eigen::SparseMatrix<double> laplacian_matrix(const GridSpec& grid) {
  const auto idx = edge_index(grid);
  std::vector<Eigen::Triplet<double>> t;
  for (int k = 0; k < grid.dim; ++k) {
    const std::size_t base = k == 0 ? 0 : idx.offset1;
    for (std::size_t e = 0; e < grid.num_edges(k); ++e) {
      if (grid.edge_on_boundary(k, e)) continue;
      const auto row = static_cast<Eigen::Index>(base + e);
      double diag = 0.0;
      for (int a = 0; a < grid.dim; ++a) {
        const double inv = 1.0 / (grid.h(a) * grid.h(a));
        for (int s : {-1, 1}) {
          const std::size_t n = shifted_edge(grid, k, e, a, s);
          if (n == npos) {
            diag -= 2.0 * inv;
          } else {
            diag -= inv;
            if (!grid.edge_on_boundary(k, n)) {
              t.emplace_back(row, static_cast<Eigen::Index>(base + n), inv);
            }
          }
        }
      }
      t.emplace_back(row, row, diag);
    }
  }
  Eigen::SparseMatrix<double> L(static_cast<Eigen::Index>(idx.total), static_cast<Eigen::Index>(idx.total));
  L.setFromTriplets(t.begin(), t.end());
  return L;
}

std::vector<double> flatten(const DiagonalTensorField& f, const GridSpec& grid) {
  std::vector<double> out;
  out.reserve(edge_index(grid).total);
  for (int k = 0; k < grid.dim; ++k) out.insert(out.end(), f.c[k].begin(), f.c[k].end());
  return out;
}

DiagonalTensorField unflatten(const DiagonalTensorField& like, const std::vector<double>& flat,
                              const GridSpec& grid) {
  DiagonalTensorField f = like;
  const auto idx = edge_index(grid);
  for (std::size_t e = 0; e < grid.num_edges(0); ++e) f.c[0][e] = flat[e];
  for (std::size_t e = 0; e < grid.num_edges(1); ++e) f.c[1][e] = flat[idx.offset1 + e];
  return f;
}

// (d_k p)^2 on every edge, flattened.
std::vector<double> pressure_gradient_squared(const PressureField& pressure, const GridSpec& grid) {
  std::vector<double> g;
  g.reserve(edge_index(grid).total);
  for (int k = 0; k < grid.dim; ++k) {
    for (std::size_t e = 0; e < grid.num_edges(k); ++e) {
      const auto n = grid.edge_nodes(k, e);
      const double d = (pressure.p[n[1]] - pressure.p[n[0]]) / grid.h(k);
      g.push_back(d * d);
    }
  }
  return g;
}

std::vector<bool> free_mask(const GridSpec& grid) {
  std::vector<bool> mask;
  for (int k = 0; k < grid.dim; ++k) {
    for (std::size_t e = 0; e < grid.num_edges(k); ++e) mask.push_back(!grid.edge_on_boundary(k, e));
  }
  return mask;
}

}  // namespace

std::string_view to_string(TimeScheme scheme) noexcept {
  switch (scheme) {
    case TimeScheme::explicit_euler: return "explicit";
    case TimeScheme::semi_implicit: return "semi_implicit";
    case TimeScheme::implicit: return "implicit";
  }
  return "unknown";
}

PressureField solve_poisson_grid(const DiagonalTensorField& field, const std::vector<double>& sources,
                                 const GridSpec& grid, const PoissonOptions& options) {
  grid.validate();
  check_field(field, grid);
  const std::size_t n = grid.num_nodes();
  if (sources.size() != n) throw Error(ErrorCode::invalid_argument, "source vector does not match the grid");

  for (int k = 0; k < grid.dim; ++k) {
    for (std::size_t e = 0; e < grid.num_edges(k); ++e) {
      if (!(field.r[k][e] >= options.r0) || !(field.r[k][e] > 0.0)) {
        throw Error(ErrorCode::degenerate_permeability,
                    "background permeability below r0 on edge " + std::to_string(e) +
                        " of direction " + std::to_string(k));
      }
      if (field.c[k][e] < 0.0) {
        throw Error(ErrorCode::negative_conductivity, "negative conductivity field value");
      }
    }
  }

  Eigen::VectorXd b(static_cast<Eigen::Index>(n));
  double total = 0.0;
  double weight_sum = 0.0;
  double scale = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    const double th = grid.node_weight(v);
    b[static_cast<Eigen::Index>(v)] = th * sources[v];
    total += th * sources[v];
    weight_sum += th;
    scale += std::abs(th * sources[v]);
  }
  if (options.project_sources) {
    const double mean = total / weight_sum;
    for (std::size_t v = 0; v < n; ++v) b[static_cast<Eigen::Index>(v)] -= grid.node_weight(v) * mean;
  } else if (std::abs(total) > 1e-10 * std::max(1.0, scale)) {
    throw Error(ErrorCode::incompatible_sources,
                "sources violate the Neumann compatibility condition: weighted total " +
                    std::to_string(total));
  }

  PressureField out;
  out.p.assign(n, 0.0);
  if (b.cwiseAbs().maxCoeff() == 0.0) return out;

  // Ground the last node, solve, then shift to weighted mean zero.
  const auto m = static_cast<Eigen::Index>(n - 1);
  std::vector<Eigen::Triplet<double>> t;
  for (int k = 0; k < grid.dim; ++k) {
    const double inv = 1.0 / (grid.h(k) * grid.h(k));
    for (std::size_t e = 0; e < grid.num_edges(k); ++e) {
      const double w = grid.edge_weight(k, e) * (field.r[k][e] + field.c[k][e]) * inv;
      const auto nodes = grid.edge_nodes(k, e);
      const auto a = static_cast<Eigen::Index>(nodes[0]);
      const auto c = static_cast<Eigen::Index>(nodes[1]);
      if (a < m) t.emplace_back(a, a, w);
      if (c < m) t.emplace_back(c, c, w);
      if (a < m && c < m) {
        t.emplace_back(a, c, -w);
        t.emplace_back(c, a, -w);
      }
    }
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(t.begin(), t.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success) {
    throw Error(ErrorCode::solver_failure, "factorisation of the grid Poisson system failed");
  }
  const Eigen::VectorXd x = ldlt.solve(b.head(m));
  double mean = 0.0;
  for (Eigen::Index v = 0; v < m; ++v) {
    out.p[static_cast<std::size_t>(v)] = x[v];
    mean += grid.node_weight(static_cast<std::size_t>(v)) * x[v];
  }
  mean /= weight_sum;
  for (double& p : out.p) p -= mean;

  const auto lhs = apply_poisson_operator(field, out.p, grid);
  double rr = 0.0;
  double bb = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    const double th = grid.node_weight(v);
    const double r = th * lhs[v] - b[static_cast<Eigen::Index>(v)];
    rr += r * r;
    bb += b[static_cast<Eigen::Index>(v)] * b[static_cast<Eigen::Index>(v)];
  }
  out.residual = std::sqrt(rr);
  if (out.residual > options.tolerance * std::sqrt(bb)) {
    throw Error(ErrorCode::solver_failure, "grid Poisson residual above tolerance");
  }
  return out;
}

std::vector<double> apply_poisson_operator(const DiagonalTensorField& field,
                                           const std::vector<double>& p, const GridSpec& grid) {
  std::vector<double> out(grid.num_nodes(), 0.0);
  for (int k = 0; k < grid.dim; ++k) {
    const double inv = 1.0 / (grid.h(k) * grid.h(k));
    for (std::size_t e = 0; e < grid.num_edges(k); ++e) {
      const auto nodes = grid.edge_nodes(k, e);
      const double flux = grid.edge_weight(k, e) * (field.r[k][e] + field.c[k][e]) * inv *
                          (p[nodes[1]] - p[nodes[0]]);
      out[nodes[0]] -= flux;
      out[nodes[1]] += flux;
    }
  }
  for (std::size_t v = 0; v < out.size(); ++v) out[v] /= grid.node_weight(v);
  return out;
}

void PDEConfig::validate(const GridSpec& grid) const {
  grid.validate();
  if (!(D2 > 0.0)) throw Error(ErrorCode::invalid_argument, "D2 must be positive");
  if (!(nu > 0.0)) throw Error(ErrorCode::invalid_argument, "nu must be positive");
  if (!(gamma > 1.0)) throw Error(ErrorCode::invalid_argument, "gamma must exceed 1");
  if (!(dt > 0.0)) throw Error(ErrorCode::invalid_argument, "dt must be positive");
  if (!(T >= 0.0)) throw Error(ErrorCode::invalid_argument, "T must be nonnegative");
  if (scheme == TimeScheme::explicit_euler) {
    double s = 0.0;
    for (int k = 0; k < grid.dim; ++k) s += 1.0 / (grid.h(k) * grid.h(k));
    const double limit = 1.0 / (2.0 * D2 * s);
    if (dt > limit * (1.0 + 1e-12)) {
      throw Error(ErrorCode::unstable_time_step,
                  "explicit scheme needs dt <= " + std::to_string(limit));
    }
  }
}

ContinuumEnergy continuum_energy(const DiagonalTensorField& field, const PressureField& pressure,
                                 const PDEConfig& config, const GridSpec& grid) {
  check_field(field, grid);
  const double wd = grid.cell_volume();
  ContinuumEnergy out;
  for (int k = 0; k < grid.dim; ++k) {
    for (std::size_t e = 0; e < grid.num_edges(k); ++e) {
      const double w = grid.edge_weight(k, e);
      const auto nodes = grid.edge_nodes(k, e);
      const double c = field.c[k][e];
      if (!pressure.p.empty()) {
        const double g = (pressure.p[nodes[1]] - pressure.p[nodes[0]]) / grid.h(k);
        out.pumping += w * wd * (field.r[k][e] + c) * g * g;
      }
      if (c > 0.0) out.metabolic += w * wd * config.nu / config.gamma * std::pow(c, config.gamma);

      // Each pair along axis a counted once through its + neighbour; ghost
      // links (missing neighbour) count with weight 2.
      for (int a = 0; a < grid.dim; ++a) {
        const double inv = 1.0 / (grid.h(a) * grid.h(a));
        const std::size_t up = shifted_edge(grid, k, e, a, 1);
        if (up != npos) {
          const double d = c - field.c[k][up];
          out.diffusion += 0.5 * config.D2 * wd * d * d * inv;
        } else if (!grid.edge_on_boundary(k, e)) {
          out.diffusion += 0.5 * config.D2 * wd * 2.0 * c * c * inv;
        }
        if (shifted_edge(grid, k, e, a, -1) == npos && !grid.edge_on_boundary(k, e)) {
          out.diffusion += 0.5 * config.D2 * wd * 2.0 * c * c * inv;
        }
      }
    }
  }
  return out;
}

std::array<std::vector<double>, 2> laplacian(const DiagonalTensorField& field, const GridSpec& grid) {
  check_field(field, grid);
  const auto L = laplacian_matrix(grid);
  const auto flat = flatten(field, grid);
  const Eigen::Map<const Eigen::VectorXd> x(flat.data(), static_cast<Eigen::Index>(flat.size()));
  const Eigen::VectorXd y = L * x;
  std::array<std::vector<double>, 2> out;
  std::size_t pos = 0;
  for (int k = 0; k < grid.dim; ++k) {
    out[k].resize(grid.num_edges(k));
    for (auto& v : out[k]) v = y[static_cast<Eigen::Index>(pos++)];
  }
  return out;
}

DiagonalTensorField step_conductivity_field(const DiagonalTensorField& field,
                                            const PressureField& pressure, const PDEConfig& config,
                                            const GridSpec& grid) {
  config.validate(grid);
  check_field(field, grid);
  if (pressure.p.size() != grid.num_nodes()) {
    throw Error(ErrorCode::invalid_argument, "pressure does not match the grid");
  }
  if (config.scheme == TimeScheme::implicit) {
    throw Error(ErrorCode::invalid_argument, "the implicit scheme needs the sources; use implicit_step");
  }
  const auto L = laplacian_matrix(grid);
  const auto c = flatten(field, grid);
  const auto g2 = pressure_gradient_squared(pressure, grid);
  const auto mask = free_mask(grid);
  const auto n = static_cast<Eigen::Index>(c.size());
  const Eigen::Map<const Eigen::VectorXd> cv(c.data(), n);

  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    rhs[i] = mask[u] ? c[u] + config.dt * (g2[u] - config.nu * decay(c[u], config.gamma)) : 0.0;
  }

  Eigen::VectorXd next;
  if (config.scheme == TimeScheme::explicit_euler) {
    next = rhs + config.dt * config.D2 * (L * cv);
  } else {
    Eigen::SparseMatrix<double> I(n, n);
    I.setIdentity();
    Eigen::SparseMatrix<double> A = I - config.dt * config.D2 * L;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    if (ldlt.info() != Eigen::Success) {
      throw Error(ErrorCode::solver_failure, "semi-implicit diffusion solve failed");
    }
    next = ldlt.solve(rhs);
  }
  std::vector<double> out(c.size());
  for (std::size_t u = 0; u < out.size(); ++u) {
    const double v = next[static_cast<Eigen::Index>(u)];
    if (!std::isfinite(v)) throw Error(ErrorCode::non_finite, "non-finite conductivity after step");
    out[u] = mask[u] ? std::max(0.0, v) : 0.0;
  }
  return unflatten(field, out, grid);
}

namespace {

// Solves min(c, F(c)) = 0 for
// F(c) = c - c_old - dt D2 L c - dt g2 + dt nu |c|^(gamma-2) c
// on the free unknowns by a semismooth Newton method.
std::vector<double> solve_implicit_conductivity(const Eigen::SparseMatrix<double>& L,
                                                const std::vector<double>& c_old,
                                                const std::vector<double>& g2,
                                                const std::vector<bool>& mask,
                                                std::vector<double> c, const PDEConfig& config) {
  const std::size_t n = c.size();
  const double a = config.dt * config.D2;
  std::vector<double> F(n);
  auto residual = [&](const std::vector<double>& x) {
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd lx = L * xv;
    double worst = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      if (!mask[u]) {
        F[u] = 0.0;
        continue;
      }
      F[u] = x[u] - c_old[u] - a * lx[static_cast<Eigen::Index>(u)] - config.dt * g2[u] +
             config.dt * config.nu * decay(x[u], config.gamma);
      worst = std::max(worst, std::abs(std::min(x[u], F[u])));
    }
    return worst;
  };

  double scale = 1.0;
  for (std::size_t u = 0; u < n; ++u) scale = std::max({scale, std::abs(c_old[u]), config.dt * g2[u]});

  for (int it = 0; it < 100; ++it) {
    const double res = residual(c);
    if (res <= 1e-14 * scale) break;

    // Active rows (c <= F) target c = 0; the others take a Newton step on F.
    std::vector<std::size_t> local(n, npos);
    std::vector<std::size_t> inactive;
    std::vector<double> delta(n, 0.0);
    for (std::size_t u = 0; u < n; ++u) {
      if (!mask[u]) continue;
      if (c[u] <= F[u]) {
        delta[u] = -c[u];
      } else {
        local[u] = inactive.size();
        inactive.push_back(u);
      }
    }
    if (!inactive.empty()) {
      const auto m = static_cast<Eigen::Index>(inactive.size());
      std::vector<Eigen::Triplet<double>> t;
      Eigen::VectorXd rhs(m);
      for (std::size_t r = 0; r < inactive.size(); ++r) {
        const std::size_t u = inactive[r];
        const double cu = std::max(std::abs(c[u]), 1e-300);
        double diag = 1.0 + config.dt * config.nu * (config.gamma - 1.0) * std::pow(cu, config.gamma - 2.0);
        double coupling = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator itL(L, static_cast<Eigen::Index>(u)); itL; ++itL) {
          // L is symmetric, so column iteration gives row entries.
          const auto v = static_cast<std::size_t>(itL.row());
          if (v == u) {
            diag -= a * itL.value();
          } else if (local[v] != npos) {
            t.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(local[v]), -a * itL.value());
          } else {
            coupling += -a * itL.value() * delta[v];
          }
        }
        t.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r), diag);
        rhs[static_cast<Eigen::Index>(r)] = -F[u] - coupling;
      }
      Eigen::SparseMatrix<double> J(m, m);
      J.setFromTriplets(t.begin(), t.end());
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(J);
      if (ldlt.info() != Eigen::Success) {
        throw Error(ErrorCode::solver_failure, "Newton system of the implicit step is singular");
      }
      const Eigen::VectorXd d = ldlt.solve(rhs);
      for (std::size_t r = 0; r < inactive.size(); ++r) delta[inactive[r]] = d[static_cast<Eigen::Index>(r)];
    }
    for (std::size_t u = 0; u < n; ++u) {
      // Keep iterates from jumping far below zero, where the decay term
      // changes sign.
      c[u] = std::max(c[u] + delta[u], -0.5 * std::abs(c[u]));
    }
  }
  if (residual(c) > 1e-9 * scale) {
    throw Error(ErrorCode::solver_failure, "implicit conductivity update did not converge");
  }
  for (std::size_t u = 0; u < n; ++u) c[u] = mask[u] ? std::max(0.0, c[u]) : 0.0;
  return c;
}

}  // namespace

DiagonalTensorField implicit_step(const DiagonalTensorField& field, const std::vector<double>& sources,
                                  const PDEConfig& config, const GridSpec& grid) {
  config.validate(grid);
  check_field(field, grid);
  const auto L = laplacian_matrix(grid);
  const auto mask = free_mask(grid);
  const auto c_old = flatten(field, grid);
  PoissonOptions popt;
  popt.tolerance = config.solve_tolerance;
  popt.r0 = config.r0;

  std::vector<double> c = c_old;
  DiagonalTensorField current = field;
  for (int it = 0; it < config.max_picard; ++it) {
    const auto pressure = solve_poisson_grid(current, sources, grid, popt);
    const auto g2 = pressure_gradient_squared(pressure, grid);
    auto next = solve_implicit_conductivity(L, c_old, g2, mask, c, config);
    double diff = 0.0;
    double scale = 0.0;
    for (std::size_t u = 0; u < c.size(); ++u) {
      diff = std::max(diff, std::abs(next[u] - c[u]));
      scale = std::max(scale, std::abs(next[u]));
    }
    c = std::move(next);
    current = unflatten(field, c, grid);
    if (diff <= config.picard_tolerance * std::max(1.0, scale)) return current;
  }
  throw Error(ErrorCode::solver_failure, "pressure fixed-point iteration of the implicit step did not converge");
}

PDETrace run_pde(const PDEConfig& config, const GridSpec& grid, const DiagonalTensorField& initial,
                 const std::vector<double>& sources) {
  config.validate(grid);
  check_field(initial, grid);
  PoissonOptions popt;
  popt.tolerance = config.solve_tolerance;
  popt.r0 = config.r0;

  PDETrace trace;
  DiagonalTensorField field = initial;
  PressureField pressure = solve_poisson_grid(field, sources, grid, popt);
  auto min_of = [&](const DiagonalTensorField& f) {
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k < grid.dim; ++k) {
      for (double v : f.c[k]) m = std::min(m, v);
    }
    return m;
  };
  const ContinuumEnergy e0 = continuum_energy(field, pressure, config, grid);
  trace.times.push_back(0.0);
  trace.energies.push_back(e0);
  trace.dissipation.push_back(0.0);
  trace.min_c.push_back(min_of(field));

  const double wd = grid.cell_volume();
  const double ref = std::max(e0.total(), std::numeric_limits<double>::min());
  const auto steps = static_cast<std::size_t>(std::ceil(config.T / config.dt - 1e-9));
  double dissipated = 0.0;
  double last_energy = e0.total();
  for (std::size_t n = 1; n <= steps; ++n) {
    DiagonalTensorField next;
    try {
      next = config.scheme == TimeScheme::implicit
                 ? implicit_step(field, sources, config, grid)
                 : step_conductivity_field(field, pressure, config, grid);
    } catch (const Error& err) {
      throw Error(err.code(), "time step " + std::to_string(n) + ": " + err.what());
    }
    double sq = 0.0;
    for (int k = 0; k < grid.dim; ++k) {
      for (std::size_t e = 0; e < field.c[k].size(); ++e) {
        const double d = next.c[k][e] - field.c[k][e];
        sq += d * d;
      }
    }
    dissipated += wd * sq / config.dt;
    field = std::move(next);
    pressure = solve_poisson_grid(field, sources, grid, popt);
    const ContinuumEnergy e = continuum_energy(field, pressure, config, grid);
    if (e.total() > last_energy + 1e-8 * ref) trace.monotone = false;
    last_energy = e.total();
    trace.worst_excess = std::max(trace.worst_excess, (e.total() + dissipated - e0.total()) / ref);
    trace.steps = n;
    if (n % std::max<std::size_t>(1, config.record_every) == 0 || n == steps) {
      trace.times.push_back(static_cast<double>(n) * config.dt);
      trace.energies.push_back(e);
      trace.dissipation.push_back(dissipated);
      trace.min_c.push_back(min_of(field));
    }
  }
  trace.final_field = std::move(field);
  trace.final_pressure = std::move(pressure);
  return trace;
}

void write_field_matrix(std::ostream& out, const GridSpec& grid, const DiagonalTensorField& field, int k) {
  const int width = k == 0 ? grid.cells[0] : grid.cells[0] + 1;
  const auto& c = field.c[k];
  const auto precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t e = 0; e < c.size(); ++e) {
    out << c[e];
    out << ((e + 1) % static_cast<std::size_t>(width) == 0 ? '\n' : ' ');
  }
  out.precision(precision);
}

}  // namespace netadapt
