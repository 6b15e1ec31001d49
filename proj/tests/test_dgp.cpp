#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "exmap/dgp.hpp"

using namespace exmap;

TEST_CASE("treatment probability matches the logistic design") {
  CHECK(treatment_probability(1) == doctest::Approx(0.9525741268224334).epsilon(1e-14));
  CHECK(treatment_probability(0) == doctest::Approx(0.7310585786300049).epsilon(1e-14));
}

TEST_CASE("S1 exposure on the 3-path") {
  const Graph g = Graph::from_edges(3, {{0, 1}, {1, 2}});
  // Middle node: neighbors 0 and 2, d*x hits only on node 0.
  const std::vector<double> z = true_exposure(Setting::S1, g, {1, 0, 1}, {1, 1, 0});
  CHECK(z[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("S3 exposure saturates from the treated count") {
  // One node with 12 treated covariate-positive neighbors.
  std::vector<std::pair<int, int>> edges;
  for (int j = 1; j <= 12; ++j) edges.emplace_back(0, j);
  const Graph g = Graph::from_edges(13, edges);
  std::vector<int> d(13, 1), x(13, 1);
  const std::vector<double> z = true_exposure(Setting::S3, g, d, x);
  CHECK(z[0] == doctest::Approx(0.6321205588285577).epsilon(1e-14));  // 1 - exp(-1)
}

TEST_CASE("threshold exposure is strict at the boundary") {
  std::vector<std::pair<int, int>> edges;
  for (int j = 1; j <= 3; ++j) edges.emplace_back(0, j);
  const Graph g = Graph::from_edges(4, edges);
  std::vector<int> x(4, 1);
  CHECK(true_exposure(Setting::Direct, g, {0, 1, 1, 0}, x)[0] == 0.0);  // count 2
  CHECK(true_exposure(Setting::Direct, g, {0, 1, 1, 1}, x)[0] == 1.0);  // count 3
}

TEST_CASE("exposure ranges per setting") {
  SimConfig cfg;
  cfg.n = 400;
  cfg.seed = 99;
  for (Setting s : {Setting::S1, Setting::S2, Setting::S3, Setting::Direct}) {
    cfg.setting = s;
    cfg.radius_constant = s == Setting::Direct ? 5.0 : 30.0;
    const Dataset data = draw_population(cfg);
    for (double z : data.z_true) {
      switch (s) {
        case Setting::S1:
          CHECK(z >= 0.0);
          CHECK(z <= 1.0);
          break;
        case Setting::S2:
          CHECK(z >= 0.0);
          CHECK(z <= 2.0);
          break;
        case Setting::S3:
          CHECK(z >= 0.0);
          CHECK(z < 1.0);
          break;
        case Setting::Direct:
          CHECK((z == 0.0 || z == 1.0));
          break;
      }
    }
  }
}

TEST_CASE("outcome equation holds exactly and counterfactuals are consistent") {
  SimConfig cfg;
  cfg.n = 200;
  cfg.setting = Setting::S1;
  cfg.seed = 5;
  const Dataset data = draw_population(cfg);
  for (int i = 0; i < data.n(); ++i) {
    const double lhs = cfg.alpha + cfg.delta * data.z_true[i] + cfg.gamma * data.d[i] +
                       cfg.xi * data.x[i] + data.noise[i];
    CHECK(data.y[i] == lhs);
    CHECK(counterfactual_outcome(cfg, data, i, data.d[i], data.z_true[i]) == data.y[i]);
    // Own-treatment contrast is exactly gamma; exposure contrast exactly delta.
    CHECK(counterfactual_outcome(cfg, data, i, 1, 0.3) -
              counterfactual_outcome(cfg, data, i, 0, 0.3) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(counterfactual_outcome(cfg, data, i, 1, 1.0) -
              counterfactual_outcome(cfg, data, i, 1, 0.0) == doctest::Approx(5.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(counterfactual_outcome(cfg, data, data.n(), 1, 0.0), std::out_of_range);
}

TEST_CASE("same config yields a bit-identical dataset") {
  SimConfig cfg;
  cfg.n = 300;
  cfg.setting = Setting::S2;
  cfg.seed = 1234;
  const Dataset a = draw_population(cfg);
  const Dataset b = draw_population(cfg);
  CHECK(a.y == b.y);
  CHECK(a.d == b.d);
  CHECK(a.x == b.x);
  CHECK(a.z_true == b.z_true);
  CHECK(a.graph.neighbors == b.graph.neighbors);
}

TEST_CASE("pure-noise outcome centers on the intercept") {
  SimConfig cfg;
  cfg.n = 4000;
  cfg.setting = Setting::S1;
  cfg.delta = 0.0;
  cfg.gamma = 0.0;
  cfg.xi = 0.0;
  cfg.alpha = -1.0;
  cfg.seed = 31;
  const Dataset data = draw_population(cfg);
  double mean = 0.0;
  for (double v : data.y) mean += v;
  mean /= data.n();
  CHECK(std::abs(mean + 1.0) < 3.0 / std::sqrt(static_cast<double>(cfg.n)));
}

TEST_CASE("empirical treatment rate in the X=1 cell") {
  SimConfig cfg;
  cfg.n = 10000;
  cfg.setting = Setting::S1;
  cfg.seed = 77;
  const Dataset data = draw_population(cfg);
  int hits = 0, total = 0;
  for (int i = 0; i < data.n(); ++i) {
    if (data.x[i] == 1) {
      ++total;
      hits += data.d[i];
    }
  }
  CHECK(std::abs(static_cast<double>(hits) / total - 0.9525741268224334) < 0.02);
}
