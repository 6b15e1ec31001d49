#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "exmap/graph.hpp"
#include "exmap/tape.hpp"

using namespace exmap;

namespace {

// Central finite differences against the tape gradients on a small
// two-layer graph-convolution expression; the independent oracle for the
// reverse sweep.
struct GradCheck {
  double max_rel_err = 0.0;
};

double loss_of(const SparseMatrix& adj, const RealMatrix& features, const RealMatrix& target,
               ParameterSet& params) {
  Tape tape;
  int h = tape.constant(features);
  h = tape.relu(tape.matmul(tape.spmm(&adj, h), tape.parameter(params, 0)));
  h = tape.matmul(tape.spmm(&adj, h), tape.parameter(params, 1));
  const int pred = tape.add_bias(tape.matmul(h, tape.parameter(params, 2)), tape.parameter(params, 3));
  return tape.scalar_value(tape.mse(pred, tape.constant(target)));
}

GradCheck gradient_check(std::uint64_t seed) {
  Rng rng(seed);
  const int n = 6;
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (uniform01(rng) < 0.5) edges.emplace_back(i, j);
  const Graph g = Graph::from_edges(n, edges);
  const SparseMatrix adj = normalized_adjacency(g).normalized;

  RealMatrix features(n, 2);
  for (double& v : features.data) v = uniform01(rng) < 0.5 ? 1.0 : 0.0;
  RealMatrix target(n, 1);
  for (double& v : target.data) v = 2.0 * uniform01(rng) - 1.0;

  ParameterSet params;
  params.add("w0", glorot_init(2, 4, rng));
  params.add("w1", glorot_init(4, 1, rng));
  params.add("dec_w", glorot_init(1, 1, rng));
  RealMatrix bias(1, 1);
  bias.data[0] = 0.1;
  params.add("dec_b", bias);

  // Reverse-mode gradients.
  Tape tape;
  int h = tape.constant(features);
  h = tape.relu(tape.matmul(tape.spmm(&adj, h), tape.parameter(params, 0)));
  h = tape.matmul(tape.spmm(&adj, h), tape.parameter(params, 1));
  const int pred = tape.add_bias(tape.matmul(h, tape.parameter(params, 2)), tape.parameter(params, 3));
  tape.backward(tape.mse(pred, tape.constant(target)));

  GradCheck out;
  const double step = 1e-5;
  for (auto& entry : params.entries) {
    for (std::size_t k = 0; k < entry.value.data.size(); ++k) {
      const double keep = entry.value.data[k];
      entry.value.data[k] = keep + step;
      const double up = loss_of(adj, features, target, params);
      entry.value.data[k] = keep - step;
      const double down = loss_of(adj, features, target, params);
      entry.value.data[k] = keep;
      const double fd = (up - down) / (2.0 * step);
      const double ad = entry.grad.data[k];
      const double rel = std::abs(fd - ad) / std::max({std::abs(fd), std::abs(ad), 1e-6});
      out.max_rel_err = std::max(out.max_rel_err, rel);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("matmul identity law") {
  Rng rng(5);
  const RealMatrix m = glorot_init(3, 3, rng);
  const RealMatrix im = matmul(RealMatrix::identity(3), m);
  for (std::size_t i = 0; i < m.data.size(); ++i) CHECK(im.data[i] == m.data[i]);
}

TEST_CASE("matmul scalar product") {
  RealMatrix a(1, 1), b(1, 1);
  a.data[0] = 2.0;
  b.data[0] = 3.0;
  CHECK(matmul(a, b).data[0] == 6.0);
}

TEST_CASE("matmul shape mismatch throws") {
  CHECK_THROWS_AS(matmul(RealMatrix(2, 3), RealMatrix(2, 3)), std::invalid_argument);
}

TEST_CASE("normalized 3-path adjacency times the ones vector") {
  const Graph g = Graph::from_edges(3, {{0, 1}, {1, 2}});
  const SparseMatrix adj = normalized_adjacency(g).normalized;
  const RealMatrix ones = RealMatrix::column({1.0, 1.0, 1.0});
  const RealMatrix v = adj.multiply(ones);
  CHECK(v(0, 0) == doctest::Approx(0.7071067811865475).epsilon(1e-12));
  CHECK(v(1, 0) == doctest::Approx(1.4142135623730951).epsilon(1e-12));
  CHECK(v(2, 0) == doctest::Approx(0.7071067811865475).epsilon(1e-12));
}

TEST_CASE("matmul associativity within 1e-10") {
  Rng rng(9);
  const RealMatrix a = glorot_init(4, 6, rng);
  const RealMatrix b = glorot_init(6, 5, rng);
  const RealMatrix c = glorot_init(5, 3, rng);
  const RealMatrix left = matmul(matmul(a, b), c);
  const RealMatrix right = matmul(a, matmul(b, c));
  for (std::size_t i = 0; i < left.data.size(); ++i)
    CHECK(std::abs(left.data[i] - right.data[i]) < 1e-10);
}

TEST_CASE("backward of a parameter sum gives unit gradients") {
  Rng rng(2);
  ParameterSet params;
  params.add("w", glorot_init(3, 2, rng));
  Tape tape;
  tape.backward(tape.sum(tape.parameter(params, 0)));
  for (double gv : params.entries[0].grad.data) CHECK(gv == 1.0);
}

TEST_CASE("backward of mse at the target is zero") {
  ParameterSet params;
  RealMatrix w(3, 1);
  w.data = {1.0, -2.0, 0.5};
  params.add("w", w);
  Tape tape;
  const int loss = tape.mse(tape.parameter(params, 0), tape.constant(w));
  CHECK(tape.scalar_value(loss) == 0.0);
  tape.backward(loss);
  for (double gv : params.entries[0].grad.data) CHECK(gv == 0.0);
}

TEST_CASE("backward requires a scalar loss") {
  ParameterSet params;
  params.add("w", RealMatrix(2, 2, 1.0));
  Tape tape;
  const int node = tape.parameter(params, 0);
  CHECK_THROWS_AS(tape.backward(node), std::invalid_argument);
}

TEST_CASE("reverse-mode gradients match central finite differences") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const GradCheck check = gradient_check(seed);
    CHECK(check.max_rel_err < 1e-5);
  }
}

TEST_CASE("adam leaves parameters unchanged on zero gradients") {
  ParameterSet params;
  params.add("w", RealMatrix(2, 2, 1.5));
  const std::vector<double> before = params.entries[0].value.data;
  adam_step(params, 0.01);
  CHECK(params.entries[0].value.data == before);
}

TEST_CASE("first adam step with unit gradient moves by about lr") {
  ParameterSet params;
  params.add("w", RealMatrix(1, 1, 1.0));
  params.entries[0].grad.data[0] = 1.0;
  adam_step(params, 0.01);
  // Closed form: lr * mhat / (sqrt(vhat) + eps) with mhat = vhat = 1.
  CHECK(params.entries[0].value.data[0] == doctest::Approx(1.0 - 0.009999999900000002).epsilon(1e-12));
  CHECK(params.entries[0].grad.data[0] == 0.0);  // gradients cleared
}

TEST_CASE("identical parameter sets update identically") {
  Rng rng(13);
  const RealMatrix init = glorot_init(2, 3, rng);
  ParameterSet a, b;
  a.add("w", init);
  b.add("w", init);
  for (int step = 0; step < 5; ++step) {
    for (std::size_t k = 0; k < init.data.size(); ++k) {
      a.entries[0].grad.data[k] = 0.1 * static_cast<double>(k) - 0.2;
      b.entries[0].grad.data[k] = 0.1 * static_cast<double>(k) - 0.2;
    }
    adam_step(a, 0.01);
    adam_step(b, 0.01);
  }
  CHECK(a.entries[0].value.data == b.entries[0].value.data);
}

TEST_CASE("glorot init is seeded and bounded") {
  Rng a(21), b(21);
  const RealMatrix m1 = glorot_init(10, 10, a);
  const RealMatrix m2 = glorot_init(10, 10, b);
  CHECK(m1.data == m2.data);
  const double bound = 0.5477225575051661;  // sqrt(6/20)
  for (double v : m1.data) CHECK(std::abs(v) <= bound);

  Rng c(1);
  const RealMatrix s = glorot_init(1, 1, c);
  CHECK(std::abs(s.data[0]) <= 1.7320508075688772);  // sqrt(3)
}
