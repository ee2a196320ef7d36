#include "netadapt/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <string>

#include "netadapt/error.hpp"

namespace netadapt {

Network rhombus_lattice(int n, double h, double origin_x, double origin_y,
                        const std::vector<std::pair<int, int>>& removed) {
  if (n < 2) throw Error(ErrorCode::invalid_preset, "rhombus needs at least 2 points per side");
  if (!(h > 0.0)) throw Error(ErrorCode::invalid_preset, "lattice spacing must be positive");
  const double cx = std::sqrt(3.0) / 2.0 * h;
  const double cy = 0.5 * h;
  std::map<std::pair<int, int>, VertexId> index;
  std::vector<Vertex> vertices;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (std::find(removed.begin(), removed.end(), std::pair{i, j}) != removed.end()) continue;
      index[{i, j}] = vertices.size();
      vertices.push_back({origin_x + (i + j) * cx, origin_y + (i - j) * cy});
    }
  }
  std::vector<Edge> edges;
  constexpr int dirs[3][2] = {{1, 0}, {0, 1}, {1, -1}};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      auto a = index.find({i, j});
      if (a == index.end()) continue;
      for (const auto& d : dirs) {
        auto b = index.find({i + d[0], j + d[1]});
        if (b == index.end()) continue;
        edges.push_back({std::min(a->second, b->second), std::max(a->second, b->second), h, 0.0});
      }
    }
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& x, const Edge& y) { return std::pair{x.i, x.j} < std::pair{y.i, y.j}; });
  return Network::build(std::move(vertices), std::move(edges));
}

Network generate_diamond(std::string_view preset) {
  if (preset == "paper-diamond") {
    // 9 x 9 rhombus without the two acute tips and one obtuse corner:
    // 78 vertices, 201 edges of length 0.16.
    return rhombus_lattice(9, 0.16, -0.1086, -0.5, {{0, 0}, {8, 8}, {8, 0}});
  }
  constexpr std::string_view small = "small-diamond";
  if (preset.substr(0, small.size()) == small) {
    int n = 5;
    std::string_view rest = preset.substr(small.size());
    if (!rest.empty()) {
      if (rest.front() != ':' && rest.front() != '(') {
        throw Error(ErrorCode::invalid_preset, "unknown preset '" + std::string(preset) + "'");
      }
      rest.remove_prefix(1);
      if (!rest.empty() && rest.back() == ')') rest.remove_suffix(1);
      const auto res = std::from_chars(rest.data(), rest.data() + rest.size(), n);
      if (res.ec != std::errc() || res.ptr != rest.data() + rest.size()) {
        throw Error(ErrorCode::invalid_preset, "bad size in preset '" + std::string(preset) + "'");
      }
    }
    if (n < 2 || n > 200) {
      throw Error(ErrorCode::invalid_preset, "small-diamond size must lie in [2, 200]");
    }
    const double h = 1.9 / ((n - 1) * std::sqrt(3.0));
    return rhombus_lattice(n, h, 0.05, -0.5);
  }
  throw Error(ErrorCode::invalid_preset, "unknown preset '" + std::string(preset) + "'");
}

SourceVector build_sources(const Network& network) {
  const std::size_t n = network.num_vertices();
  std::vector<double> s(n, 0.0);
  std::vector<bool> plus(n, false);
  double total = 0.0;
  std::size_t n_minus = 0;
  for (VertexId v = 0; v < n; ++v) {
    const double x = network.vertices()[v].x;
    const double y = network.vertices()[v].y;
    if (x <= 0.1) {
      plus[v] = true;
      const double t = y + 0.5;
      s[v] = 1e4 * std::exp(-10.0 * (50.0 * x * x + 10.0 * t * t * t * t));
      total += s[v];
    } else {
      ++n_minus;
    }
  }
  if (n_minus == n) throw Error(ErrorCode::empty_source_set, "no vertex with x <= 0.1");
  if (n_minus == 0) throw Error(ErrorCode::empty_source_set, "no vertex with x > 0.1");
  const double sink = -total / static_cast<double>(n_minus);
  for (VertexId v = 0; v < n; ++v) {
    if (!plus[v]) s[v] = sink;
  }
  return SourceVector(std::move(s), SourceVector::Balance::check);
}

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t v) {
    while (parent_[v] != v) v = parent_[v] = parent_[parent_[v]];
    return v;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

std::vector<EdgeId> spanning_tree(const Network& network, VertexId root, std::uint64_t seed) {
  const std::size_t n = network.num_vertices();
  if (n == 0) return {};
  if (root >= n) throw Error(ErrorCode::invalid_tree, "tree root out of range");
  std::vector<EdgeId> tree;
  if (seed == 0) {
    std::vector<bool> seen(n, false);
    std::queue<VertexId> queue;
    queue.push(root);
    seen[root] = true;
    while (!queue.empty()) {
      const VertexId v = queue.front();
      queue.pop();
      std::vector<EdgeId> inc(network.incident(v).begin(), network.incident(v).end());
      std::sort(inc.begin(), inc.end());
      for (EdgeId e : inc) {
        const VertexId w = network.opposite(e, v);
        if (seen[w]) continue;
        seen[w] = true;
        tree.push_back(e);
        queue.push(w);
      }
    }
  } else {
    std::mt19937_64 rng(seed);
    std::vector<EdgeId> order(network.num_edges());
    std::iota(order.begin(), order.end(), 0);
    // Fisher-Yates with a plain modulus draw keeps the order identical across
    // standard library implementations.
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng() % k]);
    UnionFind uf(n);
    for (EdgeId e : order) {
      if (uf.unite(network.edge(e).i, network.edge(e).j)) tree.push_back(e);
    }
  }
  if (tree.size() + 1 != n) throw Error(ErrorCode::invalid_tree, "network is not connected");
  std::sort(tree.begin(), tree.end());
  return tree;
}

void check_spanning_tree(const Network& network, const std::vector<EdgeId>& edges) {
  const std::size_t n = network.num_vertices();
  if (edges.size() + 1 != n) {
    throw Error(ErrorCode::invalid_tree, "a spanning tree needs exactly |V| - 1 edges");
  }
  UnionFind uf(n);
  for (EdgeId e : edges) {
    if (e >= network.num_edges()) throw Error(ErrorCode::invalid_tree, "tree edge out of range");
    if (!uf.unite(network.edge(e).i, network.edge(e).j)) {
      throw Error(ErrorCode::invalid_tree, "tree edges contain a cycle");
    }
  }
}

Network init_conductivities(const Network& network, const InitSpec& spec) {
  if (!(spec.delta > 0.0) || !(spec.background >= 0.0) || !(spec.epsilon >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "initial conductivities must be nonnegative");
  }
  const std::size_t m = network.num_edges();
  std::vector<double> c(m, spec.delta);
  if (spec.kind == InitKind::tree) {
    std::vector<EdgeId> tree;
    if (spec.tree_edges) {
      tree = *spec.tree_edges;
      check_spanning_tree(network, tree);
    } else {
      tree = spanning_tree(network, spec.root, spec.seed);
    }
    std::vector<bool> in_tree(m, false);
    for (EdgeId e : tree) in_tree[e] = true;
    std::size_t loops = spec.extra_loops;
    for (EdgeId e = 0; e < m; ++e) {
      if (in_tree[e]) continue;
      if (loops > 0) {
        --loops;
      } else {
        c[e] = spec.background;
      }
    }
  } else if (spec.kind == InitKind::full_noise) {
    std::mt19937_64 rng(spec.seed);
    for (double& x : c) x += static_cast<double>(rng() >> 11) * 0x1.0p-53;
  }
  for (double& x : c) x += spec.epsilon;
  return network.with_conductivities(c);
}

}  // namespace netadapt
