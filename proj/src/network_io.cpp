#include "netadapt/network_io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "netadapt/error.hpp"

namespace netadapt {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  return out;
}

double to_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::io_error,
                "line " + std::to_string(line_no) + ": cannot parse number '" + s + "'");
  }
}

std::size_t to_index(const std::string& s, std::size_t line_no) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::io_error,
                "line " + std::to_string(line_no) + ": cannot parse index '" + s + "'");
  }
  return v;
}

bool is_header(const std::vector<std::string>& cells, std::initializer_list<const char*> names) {
  if (cells.size() != names.size()) return false;
  std::size_t k = 0;
  for (const char* n : names) {
    if (cells[k++] != n) return false;
  }
  return true;
}

}  // namespace

Network read_network(std::istream& in) {
  enum class Section { none, vertices, edges } section = Section::none;
  std::vector<std::pair<std::size_t, Vertex>> raw_vertices;
  std::vector<Edge> edges;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cells = split_csv(t);
    if (is_header(cells, {"id", "x", "y"})) {
      section = Section::vertices;
      continue;
    }
    if (is_header(cells, {"i", "j", "L", "C"})) {
      section = Section::edges;
      continue;
    }
    switch (section) {
      case Section::none:
        throw Error(ErrorCode::io_error,
                    "line " + std::to_string(line_no) + ": data before any table header");
      case Section::vertices:
        if (cells.size() != 3) {
          throw Error(ErrorCode::io_error, "line " + std::to_string(line_no) +
                                               ": vertex rows need 3 columns");
        }
        raw_vertices.push_back({to_index(cells[0], line_no),
                                Vertex{to_double(cells[1], line_no), to_double(cells[2], line_no)}});
        break;
      case Section::edges:
        if (cells.size() != 4) {
          throw Error(ErrorCode::io_error, "line " + std::to_string(line_no) +
                                               ": edge rows need 4 columns");
        }
        edges.push_back(Edge{to_index(cells[0], line_no), to_index(cells[1], line_no),
                             to_double(cells[2], line_no), to_double(cells[3], line_no)});
        break;
    }
  }

  const std::size_t n = raw_vertices.size();
  std::vector<Vertex> vertices(n);
  std::vector<bool> filled(n, false);
  for (const auto& [id, v] : raw_vertices) {
    if (id >= n || filled[id]) {
      throw Error(ErrorCode::io_error, "vertex ids must be a permutation of 0..n-1");
    }
    vertices[id] = v;
    filled[id] = true;
  }
  return Network::build(std::move(vertices), std::move(edges));
}

Network read_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open network file " + path.string());
  return read_network(in);
}

void write_network(std::ostream& out, const Network& network) {
  const auto old_precision = out.precision();
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "id,x,y\n";
  for (VertexId v = 0; v < network.num_vertices(); ++v) {
    const Vertex& p = network.vertices()[v];
    out << v << ',' << p.x << ',' << p.y << '\n';
  }
  out << "i,j,L,C\n";
  for (const Edge& e : network.edges()) {
    out << e.i << ',' << e.j << ',' << e.length << ',' << e.conductivity << '\n';
  }
  out.precision(old_precision);
}

void write_network(const std::filesystem::path& path, const Network& network) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write network file " + path.string());
  write_network(out, network);
}

}  // namespace netadapt
