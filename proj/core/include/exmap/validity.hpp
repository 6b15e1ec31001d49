#pragma once

#include <string>
#include <vector>

#include "exmap/exposure.hpp"
#include "exmap/nuisance.hpp"

namespace exmap {

// How the pooled estimate and its variance are assembled across folds.
enum class ScoreAggregation { Pooled, PerFold };

// Rejection rule. The target quantity aggregates a squared contrast with a
// linear contrast and is positive under misspecification, so the default
// rejects on the right tail; a two-sided rule is kept for comparison runs.
enum class Sidedness { RightTail, TwoSided };

struct TestOptions {
  ScoreAggregation aggregation = ScoreAggregation::Pooled;
  Sidedness sidedness = Sidedness::RightTail;
  ExposureDesign mean_design = ExposureDesign::Linear;
};

struct TestResult {
  double theta_hat = 0.0;
  double std_error = 0.0;  // standard error of theta_hat
  double z_stat = 0.0;
  double p_value = 1.0;
  bool reject_at_05 = false;
  bool inconclusive = false;
  int effective_L = 0;
  bool nuisance_merged = false;
  Sidedness sidedness = Sidedness::RightTail;
  std::vector<double> fold_score_means;
  std::string note;
};

// Per-observation orthogonal score psi(W_i, theta, eta): over cells
// l = 1..L, the squared in/out mean contrast, the doubly robust residual
// correction weighted by twice the contrast, the linear contrast, and the
// unweighted residual correction, minus theta. `cell_label` is 1-based;
// mu_in, mu_out and cell_probs hold one entry per cell evaluated at this
// observation. Throws contract_violation when a probability leaves (0, 1).
double orthogonal_score(double y, int cell_label, const std::vector<double>& mu_in,
                        const std::vector<double>& mu_out,
                        const std::vector<double>& cell_probs, double theta);

// The mean-contrast test of whether the researcher-defined exposure
// captures everything the learned exposure knows about the outcome:
// partitions the learned exposure into L quantile cells, cross-fits cell
// means and cell propensities, and solves the estimating equation for the
// pooled score. A degenerate partition yields an inconclusive result
// instead of a throw.
TestResult dml_test(const std::vector<double>& y, const ExposureVector& zdot,
                    const ExposureVector& ztilde, int L, const FoldScheme& folds,
                    const TestOptions& options = {});

// Same test over an externally supplied cell labeling, for pipelines that
// label observations with cross-fitted representations instead of one
// pooled quantile partition.
TestResult dml_test_with_partition(const std::vector<double>& y, const ExposureVector& zdot,
                                   const Partition& partition, const FoldScheme& folds,
                                   const TestOptions& options = {});

struct ExposureChoice {
  ExposureVector exposure;
  bool used_learned = false;
  bool warning = false;
};

// Rejection means the researcher-defined mapping misses interference, so
// the learned exposure is carried forward. Inconclusive tests fall back to
// the learned exposure with a warning.
ExposureChoice select_exposure(const TestResult& result, const ExposureVector& researcher,
                               const ExposureVector& learned);

// Two-sided or right-tail standard normal p-value for a z statistic.
double normal_p_value(double z, Sidedness sidedness);

}  // namespace exmap
