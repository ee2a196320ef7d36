#include "netadapt/trajectory_io.hpp"

#include <fstream>
#include <limits>
#include <ostream>

#include "netadapt/error.hpp"

namespace netadapt {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path.string() + " for writing");
  out.precision(std::numeric_limits<double>::max_digits10);
  return out;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  const auto precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "iter,E_total,E_pumping,E_metabolic,tau_accepted,n_active_edges,n_cycles\n";
  for (const auto& r : trajectory.records) {
    out << r.iter << ',' << r.energy.total() << ',' << r.energy.pumping << ','
        << r.energy.metabolic << ',' << r.tau << ',' << r.n_active << ',' << r.n_cycles << '\n';
  }
  out.precision(precision);
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory) {
  auto out = open_output(path);
  write_trajectory_csv(out, trajectory);
}

void write_plot_csv(std::ostream& out, const Network& network) {
  const auto precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "edge,x0,y0,x1,y1,C\n";
  for (EdgeId e = 0; e < network.num_edges(); ++e) {
    const Edge& ed = network.edge(e);
    const Vertex& a = network.vertices()[ed.i];
    const Vertex& b = network.vertices()[ed.j];
    out << e << ',' << a.x << ',' << a.y << ',' << b.x << ',' << b.y << ',' << ed.conductivity
        << '\n';
  }
  out.precision(precision);
}

void write_plot_csv(const std::filesystem::path& path, const Network& network) {
  auto out = open_output(path);
  write_plot_csv(out, network);
}

}  // namespace netadapt
