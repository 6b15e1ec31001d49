#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "exmap/dgp.hpp"
#include "exmap/errors.hpp"
#include "exmap/gca.hpp"

using namespace exmap;

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const int n = static_cast<int>(a.size());
  double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (int i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0 || sbb <= 0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("feature matrix packs treatment and covariate columns") {
  const RealMatrix m = build_features({1, 0}, {0, 1});
  CHECK(m.rows == 2);
  CHECK(m.cols == 2);
  CHECK(m(0, 0) == 1.0);
  CHECK(m(0, 1) == 0.0);
  CHECK(m(1, 0) == 0.0);
  CHECK(m(1, 1) == 1.0);

  const RealMatrix zeros = build_features({0, 0, 0}, {0, 0, 0});
  for (double v : zeros.data) CHECK(v == 0.0);
}

TEST_CASE("single identity layer on the 3-path reproduces the aggregation") {
  GcaModel model;
  model.encoder_weights.push_back(RealMatrix(1, 1, 1.0));
  model.decoder_weight = 2.0;
  model.decoder_bias = -1.0;
  const Graph g = Graph::from_edges(3, {{0, 1}, {1, 2}});
  RealMatrix ones(3, 1, 1.0);
  const GcaOutput out = gca_forward(model, g, ones);
  CHECK(out.embedding[0] == doctest::Approx(0.7071067811865475).epsilon(1e-12));
  CHECK(out.embedding[1] == doctest::Approx(1.4142135623730951).epsilon(1e-12));
  CHECK(out.embedding[2] == doctest::Approx(0.7071067811865475).epsilon(1e-12));
  CHECK(out.prediction[1] == doctest::Approx(2.0 * 1.4142135623730951 - 1.0).epsilon(1e-12));
}

TEST_CASE("empty graph gives zero embeddings and bias-only predictions") {
  GcaModel model;
  model.encoder_weights.push_back(RealMatrix(2, 1, 0.7));
  model.decoder_weight = 3.0;
  model.decoder_bias = 0.25;
  const Graph g = Graph::from_edges(4, {});
  const GcaOutput out = gca_forward(model, g, build_features({1, 0, 1, 0}, {0, 1, 1, 0}));
  for (double e : out.embedding) CHECK(e == 0.0);
  for (double p : out.prediction) CHECK(p == 0.25);
}

TEST_CASE("one-layer embedding ignores the node's own features") {
  Rng rng(3);
  const Graph g = rgg_generate(40, 10.0, rng);
  GcaModel model;
  model.encoder_weights.push_back(glorot_init(2, 1, rng));

  std::vector<int> d(40, 0), x(40, 0);
  for (int i = 0; i < 40; ++i) {
    d[i] = uniform01(rng) < 0.5;
    x[i] = uniform01(rng) < 0.5;
  }
  const GcaOutput base = gca_forward(model, g, build_features(d, x));
  std::vector<int> d2 = d, x2 = x;
  d2[7] = 1 - d2[7];
  x2[7] = 1 - x2[7];
  const GcaOutput flipped = gca_forward(model, g, build_features(d2, x2));
  CHECK(flipped.embedding[7] == base.embedding[7]);
}

TEST_CASE("gcn layers are permutation equivariant") {
  Rng rng(17);
  const Graph g = rgg_generate(30, 8.0, rng);
  GcaConfig cfg;
  cfg.hidden_dims = {5};
  cfg.epochs = 30;
  cfg.seed = 9;

  std::vector<int> d(30), x(30);
  std::vector<double> y(30);
  for (int i = 0; i < 30; ++i) {
    d[i] = uniform01(rng) < 0.5;
    x[i] = uniform01(rng) < 0.5;
    y[i] = standard_normal(rng);
  }
  const GcaModel model = train_gca(g, d, x, y, cfg).model;
  const GcaOutput base = gca_forward(model, g, build_features(d, x));

  // Relabel nodes by a fixed rotation.
  const int n = g.n;
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = (i + 11) % n;
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j : g.neighbors[i])
      if (i < j) edges.emplace_back(perm[i], perm[j]);
  const Graph pg = Graph::from_edges(n, edges);
  std::vector<int> pd(n), px(n);
  for (int i = 0; i < n; ++i) {
    pd[perm[i]] = d[i];
    px[perm[i]] = x[i];
  }
  const GcaOutput permuted = gca_forward(model, pg, build_features(pd, px));
  for (int i = 0; i < n; ++i)
    CHECK(permuted.embedding[perm[i]] == doctest::Approx(base.embedding[i]).epsilon(1e-12));
}

TEST_CASE("training is deterministic and reduces the loss on a constant target") {
  Rng rng(23);
  const Graph g = rgg_generate(60, 12.0, rng);
  std::vector<int> d(60), x(60);
  for (int i = 0; i < 60; ++i) {
    d[i] = uniform01(rng) < 0.5;
    x[i] = uniform01(rng) < 0.5;
  }
  const std::vector<double> y(60, 2.5);

  GcaConfig cfg;
  cfg.epochs = 50;
  cfg.seed = 4;
  const GcaTraining a = train_gca(g, d, x, y, cfg);
  const GcaTraining b = train_gca(g, d, x, y, cfg);
  CHECK(a.model.decoder_weight == b.model.decoder_weight);
  CHECK(a.model.decoder_bias == b.model.decoder_bias);
  for (std::size_t k = 0; k < a.model.encoder_weights.size(); ++k)
    CHECK(a.model.encoder_weights[k].data == b.model.encoder_weights[k].data);

  CHECK(a.epoch_loss.size() == 50);
  CHECK(a.epoch_loss.back() <= a.epoch_loss.front());
  for (double l : a.epoch_loss) CHECK(std::isfinite(l));
  // The bias absorbs the constant target, so training drives the loss down.
  CHECK(a.epoch_loss.back() < 0.05);
  const GcaOutput out = gca_forward(a.model, g, build_features(d, x));
  double worst = 0.0;
  for (double pred : out.prediction) worst = std::max(worst, std::abs(pred - 2.5));
  CHECK(worst < 0.5);
}

TEST_CASE("embedding recovers exposure signal on the share design") {
  // Average |corr(embedding, true exposure)| over replications; no exact
  // value exists, require a clear signal.
  double total = 0.0;
  const int reps = 10;
  for (int r = 0; r < reps; ++r) {
    SimConfig sim;
    sim.n = 500;
    sim.setting = Setting::S1;
    sim.seed = 4000 + r;
    const Dataset data = draw_population(sim);
    GcaConfig cfg;
    cfg.seed = 8000 + r;
    const GcaTraining trained = train_gca(data.graph, data.d, data.x, data.y, cfg);
    const ExposureVector learned = learned_exposure(trained.model, data.graph, data.d, data.x);
    total += std::abs(pearson(learned.values, data.z_true));
  }
  CHECK(total / reps > 0.5);
}

TEST_CASE("learned exposure has one value per node and zero for isolated nodes") {
  const Graph g = Graph::from_edges(5, {{0, 1}, {1, 2}});  // nodes 3, 4 isolated
  GcaModel model;
  model.encoder_weights.push_back(RealMatrix(2, 3, 0.4));
  model.encoder_weights.push_back(RealMatrix(3, 1, -0.2));
  model.decoder_weight = 1.0;
  const ExposureVector e = learned_exposure(model, g, {1, 1, 0, 1, 0}, {1, 0, 1, 1, 1});
  CHECK(e.values.size() == 5);
  CHECK(e.kind == ExposureKind::Learned);
  CHECK(e.values[3] == 0.0);
  CHECK(e.values[4] == 0.0);
}

TEST_CASE("model container round-trips bit-exactly") {
  Rng rng(31);
  GcaModel model;
  model.encoder_weights.push_back(glorot_init(2, 16, rng));
  model.encoder_weights.push_back(glorot_init(16, 1, rng));
  model.decoder_weight = 0.123456789123456789;
  model.decoder_bias = -3.9876543210987654;
  model.hidden_activation = Activation::ReLU;

  std::stringstream ss;
  save_gca(model, ss);
  const GcaModel back = load_gca(ss);
  CHECK(back.encoder_weights.size() == 2);
  for (std::size_t k = 0; k < 2; ++k)
    CHECK(back.encoder_weights[k].data == model.encoder_weights[k].data);
  CHECK(back.decoder_weight == model.decoder_weight);
  CHECK(back.decoder_bias == model.decoder_bias);
  CHECK(back.hidden_activation == model.hidden_activation);

  std::stringstream junk("not a model");
  CHECK_THROWS_AS(load_gca(junk), std::invalid_argument);
}

TEST_CASE("divergent settings raise the training error") {
  Rng rng(5);
  const Graph g = rgg_generate(50, 20.0, rng);
  std::vector<int> d(50, 1), x(50, 1);
  std::vector<double> y(50);
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = i % 2 == 0 ? 1e160 : -1e160;  // squared error overflows at the first epoch

  GcaConfig cfg;
  cfg.epochs = 10;
  CHECK_THROWS_AS(train_gca(g, d, x, y, cfg), training_divergence_error);
}
