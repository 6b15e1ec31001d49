#include "exmap/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace exmap {

bool Graph::has_edge(int i, int j) const {
  const auto& nb = neighbors[i];
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::size_t Graph::edge_count() const {
  std::size_t total = 0;
  for (const auto& nb : neighbors) total += nb.size();
  return total / 2;
}

Graph Graph::from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  if (n < 1) throw std::invalid_argument("Graph::from_edges: n must be >= 1");
  Graph g;
  g.n = n;
  g.neighbors.assign(n, {});
  for (auto [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw std::invalid_argument("Graph::from_edges: node index out of range");
    if (i == j) throw std::invalid_argument("Graph::from_edges: self-loop rejected");
    g.neighbors[i].push_back(j);
    g.neighbors[j].push_back(i);
  }
  for (auto& nb : g.neighbors) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  return g;
}

Graph rgg_generate(int n, double c, Rng& rng) {
  if (n < 1) throw std::invalid_argument("rgg_generate: n must be >= 1");
  if (c <= 0.0) throw std::invalid_argument("rgg_generate: c must be > 0");

  Graph g;
  g.n = n;
  g.neighbors.assign(n, {});
  g.radius = std::sqrt(c / (3.14159265358979323846 * n));
  auto& pos = g.positions.emplace(n);
  for (int i = 0; i < n; ++i) {
    pos[i][0] = uniform01(rng);
    pos[i][1] = uniform01(rng);
  }

  // Bucket the unit square into cells of width >= radius; candidate
  // neighbors live in the 3x3 cell block.
  const double r = g.radius;
  const double r2 = r * r;
  const int grid = std::max(1, static_cast<int>(std::floor(1.0 / r)));
  std::vector<std::vector<int>> cells(static_cast<std::size_t>(grid) * grid);
  auto cell_of = [&](double x) {
    int k = static_cast<int>(x * grid);
    return std::min(k, grid - 1);
  };
  for (int i = 0; i < n; ++i)
    cells[static_cast<std::size_t>(cell_of(pos[i][0])) * grid + cell_of(pos[i][1])].push_back(i);

  for (int i = 0; i < n; ++i) {
    const int cx = cell_of(pos[i][0]);
    const int cy = cell_of(pos[i][1]);
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        const int nx = cx + dx;
        const int ny = cy + dy;
        if (nx < 0 || ny < 0 || nx >= grid || ny >= grid) continue;
        for (int j : cells[static_cast<std::size_t>(nx) * grid + ny]) {
          if (j <= i) continue;
          const double ddx = pos[i][0] - pos[j][0];
          const double ddy = pos[i][1] - pos[j][1];
          if (ddx * ddx + ddy * ddy <= r2) {
            g.neighbors[i].push_back(j);
            g.neighbors[j].push_back(i);
          }
        }
      }
    }
  }
  for (auto& nb : g.neighbors) std::sort(nb.begin(), nb.end());
  return g;
}

DegreeInfo normalized_adjacency(const Graph& g) {
  DegreeInfo info;
  info.degrees.resize(g.n);
  std::vector<double> inv_sqrt(g.n, 0.0);
  for (int i = 0; i < g.n; ++i) {
    info.degrees[i] = g.degree(i);
    if (info.degrees[i] > 0) inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(info.degrees[i]));
  }

  std::vector<int> row_ptr(g.n + 1, 0);
  for (int i = 0; i < g.n; ++i) row_ptr[i + 1] = row_ptr[i] + g.degree(i);
  std::vector<int> col(row_ptr.back());
  std::vector<double> val(row_ptr.back());
  for (int i = 0; i < g.n; ++i) {
    int idx = row_ptr[i];
    for (int j : g.neighbors[i]) {
      col[idx] = j;
      val[idx] = inv_sqrt[i] * inv_sqrt[j];
      ++idx;
    }
  }
  info.normalized = SparseMatrix(g.n, std::move(row_ptr), std::move(col), std::move(val));
  return info;
}

std::vector<std::vector<int>> second_order_matrix(const Graph& g) {
  std::vector<std::vector<int>> out(g.n);
  std::vector<char> mark(g.n, 0);
  for (int i = 0; i < g.n; ++i) {
    mark[i] = 1;
    for (int j : g.neighbors[i]) mark[j] = 1;
    for (int j : g.neighbors[i]) {
      for (int k : g.neighbors[j]) {
        if (!mark[k]) {
          out[i].push_back(k);
          mark[k] = 1;  // dedupe within row; cleared below
        }
      }
    }
    mark[i] = 0;
    for (int j : g.neighbors[i]) mark[j] = 0;
    for (int k : out[i]) mark[k] = 0;
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

void save_edge_list(const Graph& g, std::ostream& out) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "n=%d radius=%.17g\n", g.n, g.radius);
  out << buf;
  for (int i = 0; i < g.n; ++i)
    for (int j : g.neighbors[i])
      if (i < j) out << i << ' ' << j << '\n';
}

Graph load_edge_list(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw std::invalid_argument("load_edge_list: missing header");
  int n = 0;
  double radius = 0.0;
  if (std::sscanf(header.c_str(), "n=%d radius=%lg", &n, &radius) != 2)
    throw std::invalid_argument("load_edge_list: malformed header: " + header);

  std::vector<std::pair<int, int>> edges;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int i, j;
    if (!(ls >> i >> j)) throw std::invalid_argument("load_edge_list: malformed edge line: " + line);
    edges.emplace_back(i, j);
  }
  Graph g = Graph::from_edges(n, edges);
  g.radius = radius;
  return g;
}

}  // namespace exmap
