#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

#include "netadapt/continuum.hpp"
#include "netadapt/energy.hpp"
#include "netadapt/network.hpp"

namespace netadapt {

using ScalarFn = std::function<double(double, double)>;
/// c^k(x, y) for direction k.
using ComponentFn = std::function<double(int, double, double)>;

enum class SampleMode {
  conductivity,  ///< C_e = c^k at the edge midpoint
  permeability,  ///< C_e = w_e (r + c^k), the coefficients of the grid Poisson solver
};

/// Graph built on the grid nodes, with grid edges of length h_k.
struct SampledNetwork {
  Network network;
  GridSpec grid;
  std::vector<double> sources;  ///< S(X_i), not necessarily balanced
  /// Network edge id of grid edge e in direction k.
  std::array<std::vector<EdgeId>, 2> edge_ids;
};

SampledNetwork sample_network_from_fields(const DiagonalTensorField& field, const ScalarFn& sources,
                                          const GridSpec& grid,
                                          SampleMode mode = SampleMode::conductivity);

struct ErrorTableRow {
  double h = 0.0;
  double error = 0.0;
};

struct ErrorTable {
  std::vector<ErrorTableRow> rows;
  double order = 0.0;  ///< least-squares slope of log(error) against log(h)
};

double fit_order(const std::vector<ErrorTableRow>& rows);

/// Columns h,residual,fitted_order.
void write_error_table(std::ostream& out, const ErrorTable& table);

/// -div(c grad p) at (x, y) by nested central differences with step delta.
double manufactured_source(const ComponentFn& c, const ScalarFn& p, int dim, double x, double y,
                           double delta);

/// Max-norm residual of the rescaled Kirchhoff law over interior nodes, with
/// C, P and S sampled from smooth c, p and S = -div(c grad p) computed at ten
/// times the grid resolution. One row per entry of cells (unit domain).
ErrorTable kirchhoff_consistency(const ComponentFn& c, const ScalarFn& p, int dim,
                                 const std::vector<int>& cells);

/// Max-norm error of the grid Poisson solve (r = 1, c = 0) against
/// p = prod_k cos(pi x_k) with S = d pi^2 p.
ErrorTable poisson_convergence(int dim, const std::vector<int>& cells);

/// Integral of sum_k (nu/gamma) (c^k)^gamma over the unit domain by
/// composite Gauss-Legendre quadrature.
double metabolic_integral(const ComponentFn& c, const EnergyParams& params, int dim);

/// |weighted_energy(sampled network, W = h) - metabolic_integral| for S = 0.
ErrorTable energy_riemann_gap(const ComponentFn& c, const EnergyParams& params, int dim,
                              const std::vector<int>& cells);

/// Max entry deviation between theta_i times the rows of the grid Poisson
/// operator and the graph Laplacian (m = 2) of the permeability network,
/// relative to the largest entry.
double grid_graph_matrix_deviation(const DiagonalTensorField& field, const GridSpec& grid);

/// Max deviation between the central finite-difference gradient of
/// weighted_energy (rescaled Kirchhoff law, m = 2) and the closed-form
/// flow (Q^2/C^2 - nu C^(gamma-1)) W_e^d, relative to the largest closed-form
/// entry. W_e = h_k of the edge when per_edge_weights is set, otherwise the
/// uniform W with W^d = prod_k h_k.
double uniform_weight_gradient_check(const SampledNetwork& sampled, const EnergyParams& params,
                                     bool per_edge_weights = false);

}  // namespace netadapt
