#pragma once

#include <filesystem>
#include <iosfwd>

#include "netadapt/network.hpp"

namespace netadapt {

// Network text format: a vertex table followed by an edge table, each with a
// one-line header. Blank lines and lines starting with '#' are ignored.
//
//   id,x,y
//   0,0.0,0.0
//   1,1.0,0.0
//   i,j,L,C
//   0,1,1.0,5.0
//
// Vertex ids must be a permutation of 0..n-1.

Network read_network(std::istream& in);
Network read_network(const std::filesystem::path& path);

void write_network(std::ostream& out, const Network& network);
void write_network(const std::filesystem::path& path, const Network& network);

}  // namespace netadapt
