#include "netadapt/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "netadapt/error.hpp"
#include "netadapt/kirchhoff.hpp"

namespace netadapt {

SampledNetwork sample_network_from_fields(const DiagonalTensorField& field, const ScalarFn& sources,
                                          const GridSpec& grid, SampleMode mode) {
  grid.validate();
  SampledNetwork out;
  out.grid = grid;
  std::vector<Vertex> vertices(grid.num_nodes());
  out.sources.assign(grid.num_nodes(), 0.0);
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    const auto x = grid.node_position(v);
    vertices[v] = {x[0], x[1]};
    if (sources) out.sources[v] = sources(x[0], x[1]);
  }
  std::vector<Edge> edges;
  for (int k = 0; k < grid.dim; ++k) {
    if (field.c[k].size() != grid.num_edges(k)) {
      throw Error(ErrorCode::invalid_argument, "field does not match the grid");
    }
    for (std::size_t e = 0; e < grid.num_edges(k); ++e) {
      const auto nodes = grid.edge_nodes(k, e);
      double c = field.c[k][e];
      if (mode == SampleMode::permeability) c = grid.edge_weight(k, e) * (field.r[k][e] + c);
      out.edge_ids[k].push_back(edges.size());
      edges.push_back({nodes[0], nodes[1], grid.h(k), c});
    }
  }
  out.network = Network::build(std::move(vertices), std::move(edges));
  return out;
}

double fit_order(const std::vector<ErrorTableRow>& rows) {
  if (rows.size() < 2) return 0.0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    const double x = std::log(r.h);
    const double y = std::log(std::max(r.error, std::numeric_limits<double>::min()));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void write_error_table(std::ostream& out, const ErrorTable& table) {
  const auto precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "h,residual,fitted_order\n";
  for (const auto& r : table.rows) out << r.h << ',' << r.error << ',' << table.order << '\n';
  out.precision(precision);
}

double manufactured_source(const ComponentFn& c, const ScalarFn& p, int dim, double x, double y,
                           double delta) {
  const double half = 0.5 * delta;
  auto flux = [&](int k, double px, double py) {
    const double dx = k == 0 ? half : 0.0;
    const double dy = k == 1 ? half : 0.0;
    return c(k, px, py) * (p(px + dx, py + dy) - p(px - dx, py - dy)) / delta;
  };
  double div = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double dx = k == 0 ? half : 0.0;
    const double dy = k == 1 ? half : 0.0;
    div += (flux(k, x + dx, y + dy) - flux(k, x - dx, y - dy)) / delta;
  }
  return -div;
}

ErrorTable kirchhoff_consistency(const ComponentFn& c, const ScalarFn& p, int dim,
                                 const std::vector<int>& cells) {
  ErrorTable table;
  for (int n : cells) {
    const GridSpec grid = GridSpec::unit(dim, n);
    const auto field = make_field(grid, c, 1.0, false);
    const auto sampled = sample_network_from_fields(field, nullptr, grid);
    const auto sys = assemble(sampled.network, 2);
    Eigen::VectorXd P(static_cast<Eigen::Index>(grid.num_nodes()));
    for (std::size_t v = 0; v < grid.num_nodes(); ++v) {
      const auto x = grid.node_position(v);
      P[static_cast<Eigen::Index>(v)] = p(x[0], x[1]);
    }
    const Eigen::VectorXd lhs = sys.matrix * P;
    const double delta = grid.h(0) / 10.0;
    double worst = 0.0;
    for (std::size_t v = 0; v < grid.num_nodes(); ++v) {
      if (grid.node_weight(v) != 1.0) continue;
      const auto x = grid.node_position(v);
      const double s = manufactured_source(c, p, dim, x[0], x[1], delta);
      worst = std::max(worst, std::abs(lhs[static_cast<Eigen::Index>(v)] - s));
    }
    table.rows.push_back({grid.h(0), worst});
  }
  table.order = fit_order(table.rows);
  return table;
}

ErrorTable poisson_convergence(int dim, const std::vector<int>& cells) {
  constexpr double pi = std::numbers::pi;
  ErrorTable table;
  auto exact = [dim](double x, double y) {
    return std::cos(pi * x) * (dim == 2 ? std::cos(pi * y) : 1.0);
  };
  for (int n : cells) {
    const GridSpec grid = GridSpec::unit(dim, n);
    const auto field = make_field(grid, [](int, double, double) { return 0.0; }, 1.0);
    const auto s = sample_nodes(grid, [&](double x, double y) { return dim * pi * pi * exact(x, y); });
    PoissonOptions opt;
    opt.project_sources = true;
    const auto sol = solve_poisson_grid(field, s, grid, opt);
    double worst = 0.0;
    for (std::size_t v = 0; v < grid.num_nodes(); ++v) {
      const auto x = grid.node_position(v);
      worst = std::max(worst, std::abs(sol.p[v] - exact(x[0], x[1])));
    }
    table.rows.push_back({grid.h(0), worst});
  }
  table.order = fit_order(table.rows);
  return table;
}

double metabolic_integral(const ComponentFn& c, const EnergyParams& params, int dim) {
  // 5-point Gauss-Legendre on 64 panels per axis.
  static constexpr double nodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                      0.5384693101056831, 0.9061798459386640};
  static constexpr double weights[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                        0.4786286704993665, 0.2369268850561891};
  constexpr int panels = 64;
  const double k_met = params.metabolic_coefficient();
  std::vector<double> xs;
  std::vector<double> ws;
  for (int p = 0; p < panels; ++p) {
    const double a = static_cast<double>(p) / panels;
    const double half = 0.5 / panels;
    for (int q = 0; q < 5; ++q) {
      xs.push_back(a + half * (1.0 + nodes[q]));
      ws.push_back(half * weights[q]);
    }
  }
  double sum = 0.0;
  for (int k = 0; k < dim; ++k) {
    for (std::size_t a = 0; a < xs.size(); ++a) {
      if (dim == 1) {
        sum += ws[a] * k_met * std::pow(c(k, xs[a], 0.0), params.gamma);
        continue;
      }
      for (std::size_t b = 0; b < xs.size(); ++b) {
        sum += ws[a] * ws[b] * k_met * std::pow(c(k, xs[a], xs[b]), params.gamma);
      }
    }
  }
  return sum;
}

ErrorTable energy_riemann_gap(const ComponentFn& c, const EnergyParams& params, int dim,
                              const std::vector<int>& cells) {
  const double exact = metabolic_integral(c, params, dim);
  ErrorTable table;
  for (int n : cells) {
    const GridSpec grid = GridSpec::unit(dim, n);
    const auto field = make_field(grid, c, 1.0, false);
    const auto sampled = sample_network_from_fields(field, nullptr, grid);
    const SourceVector zero(std::vector<double>(grid.num_nodes(), 0.0));
    ModelOptions opt;
    opt.length_exponent = 2;
    opt.prune_threshold = 0.0;
    const double discrete = weighted_energy(sampled.network, zero, params, grid.h(0), dim, opt);
    table.rows.push_back({grid.h(0), std::abs(discrete - exact)});
  }
  table.order = fit_order(table.rows);
  return table;
}

double grid_graph_matrix_deviation(const DiagonalTensorField& field, const GridSpec& grid) {
  const auto sampled = sample_network_from_fields(field, nullptr, grid, SampleMode::permeability);
  const Eigen::MatrixXd graph = Eigen::MatrixXd(assemble(sampled.network, 2).matrix);
  const std::size_t n = grid.num_nodes();
  double worst = 0.0;
  double largest = 0.0;
  std::vector<double> unit(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    unit[j] = 1.0;
    const auto column = apply_poisson_operator(field, unit, grid);
    unit[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = graph(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      worst = std::max(worst, std::abs(grid.node_weight(i) * column[i] - g));
      largest = std::max(largest, std::abs(g));
    }
  }
  return largest > 0.0 ? worst / largest : worst;
}

double uniform_weight_gradient_check(const SampledNetwork& sampled, const EnergyParams& params,
                                     bool per_edge_weights) {
  const Network& net = sampled.network;
  const GridSpec& grid = sampled.grid;
  const int d = grid.dim;
  const SourceVector sources(sampled.sources, SourceVector::Balance::subtract_mean);
  ModelOptions opt;
  opt.length_exponent = 2;
  opt.prune_threshold = 0.0;

  std::vector<double> w(net.num_edges(), std::pow(grid.cell_volume(), 1.0 / d));
  if (per_edge_weights) {
    for (int k = 0; k < d; ++k) {
      for (EdgeId e : sampled.edge_ids[k]) w[e] = grid.h(k);
    }
  }

  const auto state = solve_pressures(net, sources, opt.kirchhoff());
  const double rate = params.metabolic_rate();
  std::vector<double> closed(net.num_edges());
  double largest = 0.0;
  for (EdgeId e = 0; e < net.num_edges(); ++e) {
    const double c = net.edge(e).conductivity;
    if (!(c > 0.0)) throw Error(ErrorCode::singular_gradient, "gradient check needs positive conductivities");
    const double q = state.fluxes[e];
    closed[e] = (q * q / (c * c) - rate * std::pow(c, params.gamma - 1.0)) * std::pow(w[e], d);
    largest = std::max(largest, std::abs(closed[e]));
  }

  double worst = 0.0;
  auto cs = net.conductivities();
  for (EdgeId e = 0; e < net.num_edges(); ++e) {
    const double c = cs[e];
    const double step = 1e-6 * c;
    cs[e] = c + step;
    const double up = weighted_energy(net.with_conductivities(cs), sources, params, w, d, opt);
    cs[e] = c - step;
    const double down = weighted_energy(net.with_conductivities(cs), sources, params, w, d, opt);
    cs[e] = c;
    const double fd = -(up - down) / (2.0 * step);
    worst = std::max(worst, std::abs(fd - closed[e]));
  }
  if (largest == 0.0) return worst;
  return worst / largest;
}

}  // namespace netadapt
