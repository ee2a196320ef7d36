#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "netadapt/network.hpp"

namespace netadapt {

enum class SolverBackend {
  direct,          ///< sparse LDL^T of the grounded system
  cg,              ///< conjugate gradient, diagonal preconditioner
  least_squares,   ///< minimum-norm least squares on the full singular system
};

struct KirchhoffOptions {
  /// Exponent m in the edge weights C / L^m. m = 1 is the graph model's
  /// Kirchhoff law, m = 2 the coefficient matrix of the minimisation scheme
  /// and the rescaled law on grids.
  int length_exponent = 1;
  /// Edges with C <= active_threshold are left out of the assembly.
  double active_threshold = 0.0;
  /// Relative tolerance on the node-balance residual, |BP - S| <= tol |S|.
  double tolerance = 1e-10;
  SolverBackend backend = SolverBackend::direct;
  /// Vertex pinned to zero pressure. Defaults to the highest id in the
  /// component carrying the sources.
  std::optional<VertexId> ground;
};

/// Weighted graph Laplacian b_ij = -C_ij / L_ij^m, b_ii = sum_j C_ij / L_ij^m.
struct LaplacianSystem {
  Eigen::SparseMatrix<double> matrix;  ///< full n x n, singular
  int length_exponent = 1;
};

struct PressureState {
  std::vector<double> pressures;  ///< per vertex
  std::vector<double> fluxes;     ///< per edge, oriented from edge.i to edge.j
  double residual = 0.0;          ///< |BP - S|_2 on the full system
  VertexId ground = 0;
};

LaplacianSystem assemble(const Network& network, int length_exponent,
                         double active_threshold = 0.0);

/// Solves the Kirchhoff law for the pressures and fluxes.
///
/// Vertices outside the component that carries the sources get zero
/// pressure. Throws disconnected_support when nonzero sources sit in
/// different active components and incompatible_sources when the sources do
/// not balance.
PressureState solve_pressures(const Network& network, const SourceVector& sources,
                              const KirchhoffOptions& options = {});

/// Q_ij = C_ij (P_j - P_i) / L_ij for every edge.
std::vector<double> compute_fluxes(const Network& network, std::span<const double> pressures);

/// Node balance residual B P - S per vertex.
std::vector<double> node_residual(const Network& network, const SourceVector& sources,
                                  std::span<const double> pressures, int length_exponent,
                                  double active_threshold = 0.0);

}  // namespace netadapt
