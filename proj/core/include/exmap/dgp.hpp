#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "exmap/graph.hpp"
#include "exmap/rng.hpp"

namespace exmap {

// True-exposure regimes of the simulation study. S1: covariate-weighted
// share of treated neighbors. S2: S1 plus the analogous second-order
// share. S3: saturating transform of the treated-neighborhood count.
// Direct: indicator that the count exceeds a threshold.
enum class Setting { S1, S2, S3, Direct };

const char* setting_name(Setting s);
Setting setting_from_name(const std::string& name);

struct SimConfig {
  int n = 500;
  Setting setting = Setting::S1;
  double alpha = -1.0;
  double delta = 5.0;
  double gamma = 1.0;
  double xi = 1.0;
  double radius_constant = 30.0;
  int direct_threshold = 2;
  std::uint64_t seed = 0;
};

// One simulated population. Outcomes satisfy
//   y_i = alpha + delta * z_true_i + gamma * d_i + xi * x_i + noise_i
// exactly; noise draws are stored so counterfactuals are reproducible.
struct Dataset {
  Graph graph;
  std::vector<double> y;
  std::vector<int> d;
  std::vector<int> x;
  std::vector<double> z_true;
  std::vector<double> noise;

  int n() const { return graph.n; }
};

// Pr(D = 1 | X = x) = logistic(1 + 2x).
double treatment_probability(int x);

std::vector<double> true_exposure(Setting setting, const Graph& g,
                                  const std::vector<int>& d, const std::vector<int>& x,
                                  int direct_threshold = 2);

// Draw order: graph, covariates, treatments, noise. Deterministic given rng
// state; the (cfg)-only overload seeds from cfg.seed.
Dataset draw_population(const SimConfig& cfg, Rng& rng);
Dataset draw_population(const SimConfig& cfg);

// Potential outcome for observation i under own treatment d and exposure z,
// reusing the stored noise draw.
double counterfactual_outcome(const SimConfig& cfg, const Dataset& data, int i, int d, double z);

// Delimited text with columns id, Y, D, X, Z_true; the graph is exported
// separately as an edge list.
void save_dataset_tsv(const Dataset& data, std::ostream& out);

}  // namespace exmap
