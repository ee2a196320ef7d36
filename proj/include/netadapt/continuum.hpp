#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace netadapt {

/// Rectangular grid on [lower, upper] in d = 1 or 2 dimensions.
///
/// Nodes (i, j) carry the pressure, node id i + (nx + 1) j. Conductivity
/// component k lives on the midpoints of the grid edges in direction k:
/// direction-0 edges (i, j)-(i+1, j) have id i + nx j, direction-1 edges
/// (i, j)-(i, j+1) have id i + (nx + 1) j. Edges lying on the boundary are
/// fixed to zero (homogeneous Dirichlet).
struct GridSpec {
  int dim = 2;
  std::array<double, 2> lower{0.0, 0.0};
  std::array<double, 2> upper{1.0, 1.0};
  std::array<int, 2> cells{16, 16};

  static GridSpec unit(int dim, int cells_per_axis);

  void validate() const;
  double h(int k) const { return (upper[k] - lower[k]) / cells[k]; }
  /// W^d = prod_k h_k.
  double cell_volume() const;

  std::size_t num_nodes() const;
  std::size_t num_edges(int k) const;
  std::size_t node_id(int i, int j) const { return static_cast<std::size_t>(i + (cells[0] + 1) * j); }
  std::array<double, 2> node_position(std::size_t node) const;
  std::array<double, 2> edge_midpoint(int k, std::size_t edge) const;
  /// Endpoint node ids (lower, upper) of an edge.
  std::array<std::size_t, 2> edge_nodes(int k, std::size_t edge) const;
  bool edge_on_boundary(int k, std::size_t edge) const;
  /// 1/2 for edges on the boundary, 1 otherwise.
  double edge_weight(int k, std::size_t edge) const;
  /// Control-volume fraction of a node: 1/2 per boundary axis.
  double node_weight(std::size_t node) const;
};

/// Diagonal conductivity tensor c = diag(c^1, ..., c^d) and background
/// permeability r, both on edge midpoints.
struct DiagonalTensorField {
  std::array<std::vector<double>, 2> c;
  std::array<std::vector<double>, 2> r;
};

/// Field with c^k(x) = c_fn(k, x, y) at the edge midpoints and r = r_value.
/// With dirichlet set, boundary edges are zeroed.
DiagonalTensorField make_field(const GridSpec& grid,
                               const std::function<double(int, double, double)>& c_fn,
                               double r_value = 1.0, bool dirichlet = true);

/// Nodal samples S(X_i).
std::vector<double> sample_nodes(const GridSpec& grid,
                                 const std::function<double(double, double)>& fn);

struct PressureField {
  std::vector<double> p;  ///< per node, control-volume weighted mean zero
  double residual = 0.0;
};

struct PoissonOptions {
  double tolerance = 1e-10;
  double r0 = 1e-12;
  /// Subtract the weighted mean of S instead of rejecting unbalanced data.
  bool project_sources = false;
};

/// -div((r + c) grad p) = S with zero normal flux, in flux form with a ghost
/// node closure. Equivalent to the graph Laplacian with weights
/// w_e (r_e + c_e) / h_k^2 and right-hand side theta_i S_i.
PressureField solve_poisson_grid(const DiagonalTensorField& field, const std::vector<double>& sources,
                                 const GridSpec& grid, const PoissonOptions& options = {});

/// Flux-form operator applied to p, divided by theta_i (the left-hand side of
/// the discrete Poisson equation at every node).
std::vector<double> apply_poisson_operator(const DiagonalTensorField& field,
                                           const std::vector<double>& p, const GridSpec& grid);

enum class TimeScheme { explicit_euler, semi_implicit, implicit };

std::string_view to_string(TimeScheme scheme) noexcept;

struct PDEConfig {
  double D2 = 1e-2;
  double nu = 1.0;
  double gamma = 1.5;
  double dt = 1e-3;
  double T = 0.1;
  double r0 = 1e-12;
  double solve_tolerance = 1e-10;
  TimeScheme scheme = TimeScheme::explicit_euler;
  /// Relative tolerance of the fixed-point iteration of the implicit scheme.
  double picard_tolerance = 1e-13;
  int max_picard = 500;
  /// Record energies every k steps (the final step is always recorded).
  std::size_t record_every = 1;

  /// Checks D2 > 0, nu > 0, gamma > 1, dt > 0 and, for the explicit scheme,
  /// dt <= 1 / (2 D2 sum_k 1/h_k^2).
  void validate(const GridSpec& grid) const;
};

struct ContinuumEnergy {
  double pumping = 0.0;
  double metabolic = 0.0;
  double diffusion = 0.0;

  double total() const { return pumping + metabolic + diffusion; }
};

/// W^d sum_e w_e [(r + c)(dp/h)^2 + (nu/gamma) c^gamma] + (D2/2) W^d sum |dc/h|^2,
/// the last sum over neighbouring midpoints including the Dirichlet links.
ContinuumEnergy continuum_energy(const DiagonalTensorField& field, const PressureField& pressure,
                                 const PDEConfig& config, const GridSpec& grid);

/// Discrete Laplacian of c^k with the Dirichlet closure (free edges only).
std::array<std::vector<double>, 2> laplacian(const DiagonalTensorField& field, const GridSpec& grid);

/// One explicit or semi-implicit step of
/// dc^k/dt = D2 lap c^k + (d_k p)^2 - nu |c^k|^(gamma-2) c^k, clamped at zero.
DiagonalTensorField step_conductivity_field(const DiagonalTensorField& field,
                                            const PressureField& pressure, const PDEConfig& config,
                                            const GridSpec& grid);

/// Backward Euler step with the pressure taken at the new time level
/// (fixed-point iteration on p, semismooth Newton on c >= 0).
DiagonalTensorField implicit_step(const DiagonalTensorField& field, const std::vector<double>& sources,
                                  const PDEConfig& config, const GridSpec& grid);

struct PDETrace {
  std::vector<double> times;
  std::vector<ContinuumEnergy> energies;
  std::vector<double> dissipation;  ///< cumulative sum dt W^d |dc/dt|^2
  std::vector<double> min_c;
  DiagonalTensorField final_field;
  PressureField final_pressure;
  std::size_t steps = 0;
  /// max over records of E(t_n) + dissipation_n - E(0), relative to max(E(0), tiny).
  double worst_excess = 0.0;
  bool monotone = true;  ///< E(t_n) non-increasing within 1e-8 E(0)
};

PDETrace run_pde(const PDEConfig& config, const GridSpec& grid, const DiagonalTensorField& initial,
                 const std::vector<double>& sources);

/// Component k as a text matrix, one grid row per line (edges ordered by id).
void write_field_matrix(std::ostream& out, const GridSpec& grid, const DiagonalTensorField& field, int k);

}  // namespace netadapt
