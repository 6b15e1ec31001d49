#include "exmap/dgp.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

namespace exmap {

const char* setting_name(Setting s) {
  switch (s) {
    case Setting::S1: return "S1";
    case Setting::S2: return "S2";
    case Setting::S3: return "S3";
    case Setting::Direct: return "DIRECT";
  }
  return "?";
}

Setting setting_from_name(const std::string& name) {
  if (name == "S1") return Setting::S1;
  if (name == "S2") return Setting::S2;
  if (name == "S3") return Setting::S3;
  if (name == "DIRECT" || name == "direct") return Setting::Direct;
  throw std::invalid_argument("unknown setting: " + name);
}

double treatment_probability(int x) {
  return 1.0 / (1.0 + std::exp(-(1.0 + 2.0 * x)));
}

namespace {

// Covariate-weighted treated share over a neighbor list; 0/0 := 0.
double treated_share(const std::vector<int>& nb, const std::vector<int>& d,
                     const std::vector<int>& x) {
  if (nb.empty()) return 0.0;
  int hits = 0;
  for (int j : nb) hits += d[j] * x[j];
  return static_cast<double>(hits) / static_cast<double>(nb.size());
}

int treated_count(const std::vector<int>& nb, const std::vector<int>& d,
                  const std::vector<int>& x) {
  int hits = 0;
  for (int j : nb) hits += d[j] * x[j];
  return hits;
}

}  // namespace

std::vector<double> true_exposure(Setting setting, const Graph& g,
                                  const std::vector<int>& d, const std::vector<int>& x,
                                  int direct_threshold) {
  if (static_cast<int>(d.size()) != g.n || static_cast<int>(x.size()) != g.n)
    throw std::invalid_argument("true_exposure: sequence lengths must match the graph");

  std::vector<double> z(g.n, 0.0);
  switch (setting) {
    case Setting::S1:
      for (int i = 0; i < g.n; ++i) z[i] = treated_share(g.neighbors[i], d, x);
      break;
    case Setting::S2: {
      const auto second = second_order_matrix(g);
      for (int i = 0; i < g.n; ++i)
        z[i] = treated_share(g.neighbors[i], d, x) + treated_share(second[i], d, x);
      break;
    }
    case Setting::S3:
      for (int i = 0; i < g.n; ++i) {
        const int count = treated_count(g.neighbors[i], d, x);
        z[i] = 1.0 - std::exp(-0.5 * std::max(0.0, static_cast<double>(count) - 10.0));
      }
      break;
    case Setting::Direct:
      for (int i = 0; i < g.n; ++i)
        z[i] = treated_count(g.neighbors[i], d, x) > direct_threshold ? 1.0 : 0.0;
      break;
  }
  return z;
}

Dataset draw_population(const SimConfig& cfg, Rng& rng) {
  if (cfg.n < 1) throw std::invalid_argument("draw_population: n must be >= 1");
  if (cfg.radius_constant <= 0.0)
    throw std::invalid_argument("draw_population: radius constant must be > 0");

  Dataset data;
  data.graph = rgg_generate(cfg.n, cfg.radius_constant, rng);
  data.x.resize(cfg.n);
  data.d.resize(cfg.n);
  data.noise.resize(cfg.n);
  for (int i = 0; i < cfg.n; ++i) data.x[i] = bernoulli(rng, 0.5) ? 1 : 0;
  for (int i = 0; i < cfg.n; ++i) data.d[i] = bernoulli(rng, treatment_probability(data.x[i])) ? 1 : 0;
  for (int i = 0; i < cfg.n; ++i) data.noise[i] = standard_normal(rng);

  data.z_true = true_exposure(cfg.setting, data.graph, data.d, data.x, cfg.direct_threshold);
  data.y.resize(cfg.n);
  for (int i = 0; i < cfg.n; ++i)
    data.y[i] = cfg.alpha + cfg.delta * data.z_true[i] + cfg.gamma * data.d[i] +
                cfg.xi * data.x[i] + data.noise[i];
  return data;
}

Dataset draw_population(const SimConfig& cfg) {
  Rng rng(cfg.seed);
  return draw_population(cfg, rng);
}

double counterfactual_outcome(const SimConfig& cfg, const Dataset& data, int i, int d, double z) {
  if (i < 0 || i >= data.n()) throw std::out_of_range("counterfactual_outcome: index out of range");
  return cfg.alpha + cfg.delta * z + cfg.gamma * d + cfg.xi * data.x[i] + data.noise[i];
}

void save_dataset_tsv(const Dataset& data, std::ostream& out) {
  out << "id\tY\tD\tX\tZ_true\n";
  char buf[96];
  for (int i = 0; i < data.n(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d\t%.17g\t%d\t%d\t%.17g\n", i, data.y[i], data.d[i],
                  data.x[i], data.z_true[i]);
    out << buf;
  }
}

}  // namespace exmap
