#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <sstream>

#include "exmap/graph.hpp"

using namespace exmap;

namespace {

Graph path3() { return Graph::from_edges(3, {{0, 1}, {1, 2}}); }

}  // namespace

TEST_CASE("rgg rejects n = 0") {
  Rng rng(1);
  CHECK_THROWS_AS(rgg_generate(0, 30.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(rgg_generate(10, 0.0, rng), std::invalid_argument);
}

TEST_CASE("rgg single node has zero edges") {
  Rng rng(1);
  const Graph g = rgg_generate(1, 30.0, rng);
  CHECK(g.n == 1);
  CHECK(g.edge_count() == 0);
}

TEST_CASE("rgg is deterministic given the seed") {
  Rng a(42), b(42);
  const Graph g1 = rgg_generate(300, 30.0, a);
  const Graph g2 = rgg_generate(300, 30.0, b);
  CHECK(g1.neighbors == g2.neighbors);
  CHECK(*g1.positions == *g2.positions);
}

TEST_CASE("rgg adjacency is symmetric with zero diagonal and matches the radius rule") {
  Rng rng(7);
  const Graph g = rgg_generate(200, 10.0, rng);
  const auto& pos = *g.positions;
  for (int i = 0; i < g.n; ++i) {
    CHECK_FALSE(g.has_edge(i, i));
    for (int j : g.neighbors[i]) CHECK(g.has_edge(j, i));
  }
  for (int i = 0; i < g.n; ++i) {
    for (int j = i + 1; j < g.n; ++j) {
      const double dx = pos[i][0] - pos[j][0];
      const double dy = pos[i][1] - pos[j][1];
      const bool within = dx * dx + dy * dy <= g.radius * g.radius;
      CHECK(g.has_edge(i, j) == within);
    }
  }
}

TEST_CASE("rgg mean degree near the design value at n=2000, c=30") {
  // Monte Carlo average over seeded draws; the disk area gives 30 minus
  // boundary loss, land in [24, 30].
  double total = 0.0;
  const int reps = 100;
  for (int r = 0; r < reps; ++r) {
    Rng rng(1000 + r);
    const Graph g = rgg_generate(2000, 30.0, rng);
    total += 2.0 * static_cast<double>(g.edge_count()) / g.n;
  }
  const double mean_degree = total / reps;
  CHECK(mean_degree >= 24.0);
  CHECK(mean_degree <= 30.0);
}

TEST_CASE("normalized adjacency of the 3-path") {
  const DegreeInfo info = normalized_adjacency(path3());
  CHECK(info.degrees == std::vector<int>{1, 2, 1});
  const double inv_sqrt2 = 0.7071067811865475;
  CHECK(info.normalized.entry(0, 1) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
  CHECK(info.normalized.entry(1, 2) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
  CHECK(info.normalized.entry(0, 2) == 0.0);
  CHECK(info.normalized.entry(0, 0) == 0.0);
}

TEST_CASE("normalized adjacency of the empty graph is zero") {
  const Graph g = Graph::from_edges(4, {});
  const DegreeInfo info = normalized_adjacency(g);
  CHECK(info.normalized.nonzeros() == 0);
  const RealMatrix dense = info.normalized.dense();
  for (double v : dense.data) CHECK(v == 0.0);
}

TEST_CASE("normalized adjacency of the triangle has off-diagonal 1/2") {
  const Graph g = Graph::from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
  const DegreeInfo info = normalized_adjacency(g);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(info.normalized.entry(i, j) == doctest::Approx(i == j ? 0.0 : 0.5).epsilon(1e-12));
}

TEST_CASE("normalized adjacency rows of isolated nodes are zero") {
  const Graph g = Graph::from_edges(4, {{0, 1}});  // nodes 2, 3 isolated
  const RealMatrix dense = normalized_adjacency(g).normalized.dense();
  for (int j = 0; j < 4; ++j) {
    CHECK(dense(2, j) == 0.0);
    CHECK(dense(3, j) == 0.0);
  }
}

TEST_CASE("second order matrix on the 3-path") {
  const auto second = second_order_matrix(path3());
  CHECK(second[0] == std::vector<int>{2});
  CHECK(second[1].empty());
  CHECK(second[2] == std::vector<int>{0});
}

TEST_CASE("second order matrix on the triangle is empty") {
  const Graph g = Graph::from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
  for (const auto& row : second_order_matrix(g)) CHECK(row.empty());
}

TEST_CASE("second order matrix on the star connects all leaf pairs") {
  const Graph g = Graph::from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  const auto second = second_order_matrix(g);
  CHECK(second[0].empty());
  for (int leaf = 1; leaf <= 4; ++leaf) {
    std::vector<int> expected;
    for (int other = 1; other <= 4; ++other)
      if (other != leaf) expected.push_back(other);
    CHECK(second[leaf] == expected);
  }
}

TEST_CASE("second order matrix is symmetric, zero diagonal, disjoint from adjacency") {
  Rng rng(11);
  const Graph g = rgg_generate(150, 8.0, rng);
  const auto second = second_order_matrix(g);
  for (int i = 0; i < g.n; ++i) {
    for (int k : second[i]) {
      CHECK(k != i);
      CHECK_FALSE(g.has_edge(i, k));
      const auto& row = second[k];
      CHECK(std::binary_search(row.begin(), row.end(), i));
    }
  }
}

TEST_CASE("edge list round-trip") {
  Rng rng(3);
  const Graph g = rgg_generate(80, 12.0, rng);
  std::stringstream ss;
  save_edge_list(g, ss);
  const Graph back = load_edge_list(ss);
  CHECK(back.n == g.n);
  CHECK(back.radius == g.radius);
  CHECK(back.neighbors == g.neighbors);
}

TEST_CASE("edge list rejects malformed input") {
  std::stringstream bad("nope\n");
  CHECK_THROWS_AS(load_edge_list(bad), std::invalid_argument);
  std::stringstream self("n=2 radius=0.5\n0 0\n");
  CHECK_THROWS_AS(load_edge_list(self), std::invalid_argument);
}
