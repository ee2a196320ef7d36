#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace netadapt {

using VertexId = std::size_t;
using EdgeId = std::size_t;

struct Vertex {
  double x = 0.0;
  double y = 0.0;
};

/// Undirected edge. Inside a Network the endpoints are stored as (min, max).
struct Edge {
  VertexId i = 0;
  VertexId j = 0;
  double length = 1.0;
  double conductivity = 0.0;
};

/// Undirected graph with per-edge lengths and conductivities.
///
/// Vertices are identified by their index. A Network is immutable once
/// built; conductivity updates produce a new value through
/// with_conductivities().
class Network {
 public:
  Network() = default;

  /// Validates and canonicalises the edge list. Throws Error with
  /// unknown_vertex, self_loop, duplicate_edge, nonpositive_length or
  /// negative_conductivity.
  static Network build(std::vector<Vertex> vertices, std::vector<Edge> edges);

  std::size_t num_vertices() const noexcept { return vertices_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  const std::vector<Vertex>& vertices() const noexcept { return vertices_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_.at(e); }

  /// Edge ids incident to vertex v.
  std::span<const EdgeId> incident(VertexId v) const;

  /// Neighbour on the other side of edge e, seen from v.
  VertexId opposite(EdgeId e, VertexId v) const;

  std::optional<EdgeId> find_edge(VertexId a, VertexId b) const;
  bool adjacent(VertexId a, VertexId b) const { return find_edge(a, b).has_value(); }

  std::vector<double> conductivities() const;
  std::vector<double> lengths() const;

  /// Copy with the conductivity vector replaced (indexed by EdgeId).
  Network with_conductivities(std::span<const double> conductivities) const;

 private:
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeId>> incidence_;
};

/// Per-vertex sources (S > 0) and sinks (S < 0).
class SourceVector {
 public:
  enum class Balance { check, subtract_mean };

  SourceVector() = default;

  /// With Balance::check the total must vanish to within
  /// balance_tolerance(values); otherwise incompatible_sources is thrown.
  explicit SourceVector(std::vector<double> values, Balance balance = Balance::check);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](VertexId v) const { return values_[v]; }
  std::span<const double> values() const noexcept { return values_; }

  double total() const;
  double l1_norm() const;
  double l2_norm() const;
  bool is_zero() const;

  /// Absolute tolerance for the total: 1e-12 scaled by max(1, |S|_1).
  static double balance_tolerance(std::span<const double> values);

 private:
  std::vector<double> values_;
};

/// Bipartition V = V1 ∪ V2 of the vertex set.
class CutPartition {
 public:
  /// V2 is the complement of `first` in {0, ..., n-1}.
  static CutPartition from_first(std::size_t num_vertices, std::span<const VertexId> first);

  /// Both sets given explicitly; throws invalid_partition unless they are
  /// disjoint and cover all vertices.
  static CutPartition from_sets(std::size_t num_vertices, std::span<const VertexId> first,
                                std::span<const VertexId> second);

  std::size_t num_vertices() const noexcept { return in_first_.size(); }
  bool in_first(VertexId v) const { return in_first_.at(v); }
  std::vector<VertexId> first() const;
  std::vector<VertexId> second() const;

  /// Edges with exactly one endpoint in each set.
  std::vector<EdgeId> cut_edges(const Network& network) const;

 private:
  std::vector<bool> in_first_;
};

/// Connected components of the subgraph made of edges with C > threshold.
/// Vertices without such edges are singleton components. Components are
/// sorted by their smallest vertex id; vertex lists are sorted ascending.
std::vector<std::vector<VertexId>> active_components(const Network& network, double threshold);

/// Component label per vertex for the same subgraph.
std::vector<std::size_t> component_labels(const Network& network, double threshold,
                                          std::size_t* num_components = nullptr);

/// Number of independent cycles in the active subgraph
/// (|E_active| - |V| + #components).
std::size_t cycle_count(const Network& network, double threshold);

std::size_t active_edge_count(const Network& network, double threshold);

/// Net source inside V1 (equal to minus the net source inside V2).
double cut_flux(const Network& network, const CutPartition& partition,
                const SourceVector& sources);

}  // namespace netadapt
