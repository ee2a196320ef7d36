#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "netadapt/network.hpp"

namespace netadapt {

/// Triangulated rhombus with n x n lattice points (i, j) at
/// origin + i e1 + j e2, e1 = h (sqrt3/2, 1/2), e2 = h (sqrt3/2, -1/2).
/// Neighbours along e1, e2 and e1 - e2 are joined, so every edge has length h.
/// Vertex ids follow the (i, j) order of the remaining points.
Network rhombus_lattice(int n, double h, double origin_x, double origin_y,
                        const std::vector<std::pair<int, int>>& removed = {});

/// Presets: "paper-diamond" (78 vertices, 201 edges) and "small-diamond" or
/// "small-diamond:N" (full N x N rhombus, N = 5 by default). All vertices lie
/// in (0, 2) x (-1.5, 0.5). Conductivities are zero.
Network generate_diamond(std::string_view preset);

/// S_i = 1e4 exp(-10 (50 x^2 + 10 (y + 0.5)^4)) for x <= 0.1 and a constant
/// negative value elsewhere so that the total vanishes.
SourceVector build_sources(const Network& network);

enum class InitKind { tree, full, full_noise };

struct InitSpec {
  InitKind kind = InitKind::tree;
  double delta = 5.0;         ///< tree (or full graph) conductivity
  double background = 1e-10;  ///< off-tree conductivity
  double epsilon = 0.0;       ///< added to every edge afterwards
  /// Number of off-tree edges (lowest ids first) raised to delta.
  std::size_t extra_loops = 0;
  /// Random spanning tree from this seed; 0 gives the breadth-first tree.
  std::uint64_t seed = 0;
  VertexId root = 0;
  /// Explicit spanning tree; overrides the generated one.
  std::optional<std::vector<EdgeId>> tree_edges;
};

/// Breadth-first spanning tree from root (neighbours in edge-id order), or a
/// random one (Kruskal on a seeded shuffle) when seed != 0. Sorted edge ids.
std::vector<EdgeId> spanning_tree(const Network& network, VertexId root, std::uint64_t seed = 0);

/// Throws invalid_tree unless the edges form a spanning tree.
void check_spanning_tree(const Network& network, const std::vector<EdgeId>& edges);

Network init_conductivities(const Network& network, const InitSpec& spec);

}  // namespace netadapt
