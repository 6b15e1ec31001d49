#pragma once

#include <vector>

#include "exmap/exposure.hpp"
#include "exmap/graph.hpp"
#include "exmap/matrix.hpp"
#include "exmap/rng.hpp"

namespace exmap {

// Propensities are clamped to this band before any inversion.
inline constexpr double kPropensityTrim = 0.01;

inline double trim_probability(double p) {
  if (p < kPropensityTrim) return kPropensityTrim;
  if (p > 1.0 - kPropensityTrim) return 1.0 - kPropensityTrim;
  return p;
}

// Cross-fitting folds with sizes differing by at most one.
struct FoldScheme {
  int k_folds = 0;
  std::vector<int> assignment;
};

FoldScheme make_folds(int n, int k, Rng& rng);

// Logistic regression by Newton iterations (gradient sup-norm < 1e-8, at
// most 100 steps). Collinear design columns are dropped; if the fit fails
// outright the marginal frequency is used instead.
struct LogisticFit {
  std::vector<double> beta;
  bool fell_back = false;
  double fallback_rate = 0.0;

  double predict(const std::vector<double>& row) const;
};

LogisticFit fit_logistic(const std::vector<std::vector<double>>& rows,
                         const std::vector<int>& labels);

// Out-of-fold Pr(D=1 | X) from a logistic fit of d on [1, x], trimmed.
std::vector<double> fit_treatment_propensity(const std::vector<int>& d,
                                             const std::vector<int>& x,
                                             const FoldScheme& folds);

// Exact Pr(Z = 1 | covariates of others, graph) for the threshold exposure:
// with m eligible neighbors (x_j = 1) each treated with probability
// logistic(3), the binomial upper tail beyond `threshold`. Not trimmed.
std::vector<double> oracle_exposure_propensity(const Graph& g, const std::vector<int>& x,
                                               int threshold);

// Regression design over the researcher exposure. Linear matches the study
// protocol (a deliberately simple conditional-mean model); Quadratic is the
// richer alternative for library use.
enum class ExposureDesign { Linear, Quadratic };

// Conditional outcome means given the researcher exposure, fitted
// separately inside each learned-exposure cell and its complement,
// cross-fit: entry (i, l) is the out-of-fold prediction at observation i.
// An empty in-cell training set falls back to the full-sample fit for that
// cell and raises `merged`.
struct CellMeanFit {
  RealMatrix in_means;   // n x L
  RealMatrix out_means;  // n x L
  bool merged = false;
};

CellMeanFit fit_cell_means(const std::vector<double>& y, const ExposureVector& zdot,
                           const Partition& partition, const FoldScheme& folds,
                           ExposureDesign design = ExposureDesign::Linear);

// Out-of-fold Pr(label = l | researcher exposure) per cell, trimmed;
// entry (i, l).
RealMatrix fit_cell_propensity(const ExposureVector& zdot, const Partition& partition,
                               const FoldScheme& folds,
                               ExposureDesign design = ExposureDesign::Linear);

}  // namespace exmap
