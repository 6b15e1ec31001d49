#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

#include "exmap/matrix.hpp"
#include "exmap/rng.hpp"

namespace exmap {

// Undirected simple graph: no self-loops, symmetric adjacency. Neighbor
// lists are kept sorted; immutable after construction, safe to share
// read-only across replication workers.
struct Graph {
  int n = 0;
  std::vector<std::vector<int>> neighbors;
  std::optional<std::vector<std::array<double, 2>>> positions;
  double radius = 0.0;

  int degree(int i) const { return static_cast<int>(neighbors[i].size()); }
  bool has_edge(int i, int j) const;
  std::size_t edge_count() const;

  // Builds from an (i, j) pair list; validates indices, drops duplicates
  // and self-loops are rejected.
  static Graph from_edges(int n, const std::vector<std::pair<int, int>>& edges);
};

// Random geometric graph on the unit square: positions uniform, an edge
// whenever Euclidean distance <= (c / (pi n))^{1/2}. Ties at the radius are
// edges. Throws std::invalid_argument for n < 1 or c <= 0.
Graph rgg_generate(int n, double c, Rng& rng);

// Degrees t_ii and the symmetric normalization T^{-1/2} A T^{-1/2}.
// Rows and columns of isolated nodes are identically zero.
struct DegreeInfo {
  std::vector<int> degrees;
  SparseMatrix normalized;
};

DegreeInfo normalized_adjacency(const Graph& g);

// Nodes reachable by a path of length two that are neither direct
// neighbors nor the node itself. Symmetric, zero diagonal.
std::vector<std::vector<int>> second_order_matrix(const Graph& g);

// Edge-list text format: header "n=<count> radius=<r>", then one "i j"
// pair per line with 0-based indices and i < j.
void save_edge_list(const Graph& g, std::ostream& out);
Graph load_edge_list(std::istream& in);

}  // namespace exmap
