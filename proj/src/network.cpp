#include "netadapt/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <utility>

#include "netadapt/error.hpp"

namespace netadapt {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent_[a] = b;  // keep the smaller id as root
  }

 private:
  std::vector<std::size_t> parent_;
};

std::string edge_name(VertexId a, VertexId b) {
  return "(" + std::to_string(a) + "," + std::to_string(b) + ")";
}

}  // namespace

Network Network::build(std::vector<Vertex> vertices, std::vector<Edge> edges) {
  const std::size_t n = vertices.size();
  std::set<std::pair<VertexId, VertexId>> seen;
  for (auto& e : edges) {
    if (e.i >= n || e.j >= n) {
      throw Error(ErrorCode::unknown_vertex,
                  "edge " + edge_name(e.i, e.j) + " references a vertex outside [0, " +
                      std::to_string(n) + ")");
    }
    if (e.i == e.j) {
      throw Error(ErrorCode::self_loop, "self-loop at vertex " + std::to_string(e.i));
    }
    if (e.i > e.j) std::swap(e.i, e.j);
    if (!seen.emplace(e.i, e.j).second) {
      throw Error(ErrorCode::duplicate_edge, "duplicate edge " + edge_name(e.i, e.j));
    }
    if (!(e.length > 0.0) || !std::isfinite(e.length)) {
      throw Error(ErrorCode::nonpositive_length,
                  "edge " + edge_name(e.i, e.j) + " has non-positive length");
    }
    if (!(e.conductivity >= 0.0) || !std::isfinite(e.conductivity)) {
      throw Error(ErrorCode::negative_conductivity,
                  "edge " + edge_name(e.i, e.j) + " has negative or non-finite conductivity");
    }
  }

  Network net;
  net.vertices_ = std::move(vertices);
  net.edges_ = std::move(edges);
  net.incidence_.assign(n, {});
  for (EdgeId e = 0; e < net.edges_.size(); ++e) {
    net.incidence_[net.edges_[e].i].push_back(e);
    net.incidence_[net.edges_[e].j].push_back(e);
  }
  return net;
}

std::span<const EdgeId> Network::incident(VertexId v) const { return incidence_.at(v); }

VertexId Network::opposite(EdgeId e, VertexId v) const {
  const Edge& ed = edges_.at(e);
  return ed.i == v ? ed.j : ed.i;
}

std::optional<EdgeId> Network::find_edge(VertexId a, VertexId b) const {
  if (a >= vertices_.size() || b >= vertices_.size()) return std::nullopt;
  const auto& inc = incidence_[a].size() <= incidence_[b].size() ? incidence_[a] : incidence_[b];
  for (EdgeId e : inc) {
    const Edge& ed = edges_[e];
    if ((ed.i == a && ed.j == b) || (ed.i == b && ed.j == a)) return e;
  }
  return std::nullopt;
}

std::vector<double> Network::conductivities() const {
  std::vector<double> c(edges_.size());
  std::transform(edges_.begin(), edges_.end(), c.begin(),
                 [](const Edge& e) { return e.conductivity; });
  return c;
}

std::vector<double> Network::lengths() const {
  std::vector<double> l(edges_.size());
  std::transform(edges_.begin(), edges_.end(), l.begin(), [](const Edge& e) { return e.length; });
  return l;
}

Network Network::with_conductivities(std::span<const double> conductivities) const {
  if (conductivities.size() != edges_.size()) {
    throw Error(ErrorCode::invalid_argument, "conductivity vector has wrong size");
  }
  Network out = *this;
  for (EdgeId e = 0; e < edges_.size(); ++e) {
    const double c = conductivities[e];
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw Error(ErrorCode::negative_conductivity,
                  "edge " + edge_name(edges_[e].i, edges_[e].j) +
                      " has negative or non-finite conductivity");
    }
    out.edges_[e].conductivity = c;
  }
  return out;
}

// ---------------------------------------------------------------------------

SourceVector::SourceVector(std::vector<double> values, Balance balance)
    : values_(std::move(values)) {
  for (double s : values_) {
    if (!std::isfinite(s)) throw Error(ErrorCode::non_finite, "non-finite source value");
  }
  if (balance == Balance::subtract_mean && !values_.empty()) {
    const double mean = total() / static_cast<double>(values_.size());
    for (double& s : values_) s -= mean;
  }
  const double tol = balance_tolerance(values_);
  if (std::abs(total()) > tol) {
    throw Error(ErrorCode::incompatible_sources,
                "sources do not balance: total " + std::to_string(total()));
  }
}

double SourceVector::total() const {
  // Pairwise-stable enough for the sizes used here; summed in index order so
  // results are reproducible.
  return std::accumulate(values_.begin(), values_.end(), 0.0);
}

double SourceVector::l1_norm() const {
  double s = 0.0;
  for (double v : values_) s += std::abs(v);
  return s;
}

double SourceVector::l2_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

bool SourceVector::is_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

double SourceVector::balance_tolerance(std::span<const double> values) {
  double l1 = 0.0;
  for (double v : values) l1 += std::abs(v);
  return 1e-12 * std::max(1.0, l1);
}

// ---------------------------------------------------------------------------

CutPartition CutPartition::from_first(std::size_t num_vertices, std::span<const VertexId> first) {
  CutPartition p;
  p.in_first_.assign(num_vertices, false);
  for (VertexId v : first) {
    if (v >= num_vertices) {
      throw Error(ErrorCode::invalid_partition, "vertex " + std::to_string(v) + " out of range");
    }
    p.in_first_[v] = true;
  }
  return p;
}

CutPartition CutPartition::from_sets(std::size_t num_vertices, std::span<const VertexId> first,
                                     std::span<const VertexId> second) {
  std::vector<int> owner(num_vertices, 0);
  auto mark = [&](std::span<const VertexId> set, int tag) {
    for (VertexId v : set) {
      if (v >= num_vertices) {
        throw Error(ErrorCode::invalid_partition, "vertex " + std::to_string(v) + " out of range");
      }
      if (owner[v] != 0) {
        throw Error(ErrorCode::invalid_partition,
                    "vertex " + std::to_string(v) + " appears twice in the partition");
      }
      owner[v] = tag;
    }
  };
  mark(first, 1);
  mark(second, 2);
  for (VertexId v = 0; v < num_vertices; ++v) {
    if (owner[v] == 0) {
      throw Error(ErrorCode::invalid_partition,
                  "partition does not cover vertex " + std::to_string(v));
    }
  }
  return from_first(num_vertices, first);
}

std::vector<VertexId> CutPartition::first() const {
  std::vector<VertexId> out;
  for (VertexId v = 0; v < in_first_.size(); ++v)
    if (in_first_[v]) out.push_back(v);
  return out;
}

std::vector<VertexId> CutPartition::second() const {
  std::vector<VertexId> out;
  for (VertexId v = 0; v < in_first_.size(); ++v)
    if (!in_first_[v]) out.push_back(v);
  return out;
}

std::vector<EdgeId> CutPartition::cut_edges(const Network& network) const {
  if (network.num_vertices() != in_first_.size()) {
    throw Error(ErrorCode::invalid_partition, "partition size does not match the network");
  }
  std::vector<EdgeId> out;
  for (EdgeId e = 0; e < network.num_edges(); ++e) {
    const Edge& ed = network.edge(e);
    if (in_first_[ed.i] != in_first_[ed.j]) out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> component_labels(const Network& network, double threshold,
                                          std::size_t* num_components) {
  const std::size_t n = network.num_vertices();
  DisjointSets sets(n);
  for (const Edge& e : network.edges()) {
    if (e.conductivity > threshold) sets.unite(e.i, e.j);
  }
  std::vector<std::size_t> root_label(n, n);
  std::vector<std::size_t> labels(n);
  std::size_t count = 0;
  for (VertexId v = 0; v < n; ++v) {
    const std::size_t r = sets.find(v);
    if (root_label[r] == n) root_label[r] = count++;
    labels[v] = root_label[r];
  }
  if (num_components) *num_components = count;
  return labels;
}

std::vector<std::vector<VertexId>> active_components(const Network& network, double threshold) {
  std::size_t count = 0;
  const auto labels = component_labels(network, threshold, &count);
  std::vector<std::vector<VertexId>> out(count);
  for (VertexId v = 0; v < labels.size(); ++v) out[labels[v]].push_back(v);
  return out;
}

std::size_t active_edge_count(const Network& network, double threshold) {
  return static_cast<std::size_t>(
      std::count_if(network.edges().begin(), network.edges().end(),
                    [threshold](const Edge& e) { return e.conductivity > threshold; }));
}

std::size_t cycle_count(const Network& network, double threshold) {
  std::size_t components = 0;
  component_labels(network, threshold, &components);
  // Every isolated vertex contributes one component and no edge, so this is
  // the same as counting only touched vertices.
  return active_edge_count(network, threshold) + components - network.num_vertices();
}

double cut_flux(const Network& network, const CutPartition& partition,
                const SourceVector& sources) {
  if (partition.num_vertices() != network.num_vertices() ||
      sources.size() != network.num_vertices()) {
    throw Error(ErrorCode::invalid_partition, "partition does not cover all vertices");
  }
  double flux = 0.0;
  for (VertexId v = 0; v < network.num_vertices(); ++v) {
    if (partition.in_first(v)) flux += sources[v];
  }
  return flux;
}

}  // namespace netadapt
