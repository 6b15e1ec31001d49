#include "exmap/validity.hpp"

#include <cmath>
#include <stdexcept>

#include "exmap/errors.hpp"

namespace exmap {

double normal_p_value(double z, Sidedness sidedness) {
  // Phi(z) = 0.5 * erfc(-z / sqrt(2))
  if (sidedness == Sidedness::TwoSided)
    return std::erfc(std::abs(z) / 1.4142135623730951);
  return 0.5 * std::erfc(z / 1.4142135623730951);
}

double orthogonal_score(double y, int cell_label, const std::vector<double>& mu_in,
                        const std::vector<double>& mu_out,
                        const std::vector<double>& cell_probs, double theta) {
  const int L = static_cast<int>(mu_in.size());
  if (static_cast<int>(mu_out.size()) != L || static_cast<int>(cell_probs.size()) != L)
    throw std::invalid_argument("orthogonal_score: per-cell inputs disagree in length");
  if (cell_label < 1 || cell_label > L)
    throw std::invalid_argument("orthogonal_score: cell label out of range");

  double total = 0.0;
  for (int l = 0; l < L; ++l) {
    const double p = cell_probs[l];
    if (!(p > 0.0 && p < 1.0))
      throw contract_violation("orthogonal_score: cell probability outside (0,1)");
    const double contrast = mu_in[l] - mu_out[l];
    const double in_cell = cell_label == l + 1 ? 1.0 : 0.0;
    const double residual =
        (y - mu_in[l]) * in_cell / p - (y - mu_out[l]) * (1.0 - in_cell) / (1.0 - p);
    total += contrast * contrast + 2.0 * contrast * residual + contrast + residual;
  }
  return total - theta;
}

TestResult dml_test(const std::vector<double>& y, const ExposureVector& zdot,
                    const ExposureVector& ztilde, int L, const FoldScheme& folds,
                    const TestOptions& options) {
  const int n = static_cast<int>(y.size());
  if (static_cast<int>(zdot.values.size()) != n || static_cast<int>(ztilde.values.size()) != n)
    throw std::invalid_argument("dml_test: exposure lengths must match the outcome");
  if (L < 2) throw std::invalid_argument("dml_test: L must be >= 2");
  if (n < 10 * L) throw std::invalid_argument("dml_test: need at least 10*L observations");

  Partition partition;
  try {
    partition = quantile_partition(ztilde, L);
  } catch (const degenerate_partition_error& e) {
    TestResult result;
    result.sidedness = options.sidedness;
    result.inconclusive = true;
    result.note = e.what();
    return result;
  }
  return dml_test_with_partition(y, zdot, partition, folds, options);
}

TestResult dml_test_with_partition(const std::vector<double>& y, const ExposureVector& zdot,
                                   const Partition& partition, const FoldScheme& folds,
                                   const TestOptions& options) {
  const int n = static_cast<int>(y.size());
  if (static_cast<int>(partition.labels.size()) != n || static_cast<int>(zdot.values.size()) != n)
    throw std::invalid_argument("dml_test: partition labels must match the outcome length");

  TestResult result;
  result.sidedness = options.sidedness;
  result.effective_L = partition.cell_count;
  if (partition.cell_count < 2) {
    result.inconclusive = true;
    result.note = "partition collapsed below two cells";
    return result;
  }

  const CellMeanFit means = fit_cell_means(y, zdot, partition, folds, options.mean_design);
  const RealMatrix probs = fit_cell_propensity(zdot, partition, folds, options.mean_design);
  result.nuisance_merged = means.merged;

  // Score at theta = 0; psi is linear in theta so the estimating equation
  // solves to the plain mean of these terms.
  std::vector<double> g(n);
  const int cells = partition.cell_count;
  std::vector<double> mu_in(cells), mu_out(cells), pl(cells);
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < cells; ++l) {
      mu_in[l] = means.in_means(i, l);
      mu_out[l] = means.out_means(i, l);
      pl[l] = probs(i, l);
    }
    g[i] = orthogonal_score(y[i], partition.labels[i], mu_in, mu_out, pl, 0.0);
  }

  result.fold_score_means.assign(folds.k_folds, 0.0);
  std::vector<int> fold_sizes(folds.k_folds, 0);
  for (int i = 0; i < n; ++i) {
    result.fold_score_means[folds.assignment[i]] += g[i];
    fold_sizes[folds.assignment[i]] += 1;
  }
  for (int k = 0; k < folds.k_folds; ++k)
    if (fold_sizes[k] > 0) result.fold_score_means[k] /= fold_sizes[k];

  double theta = 0.0;
  double variance = 0.0;
  if (options.aggregation == ScoreAggregation::Pooled) {
    for (double v : g) theta += v;
    theta /= n;
    for (double v : g) variance += (v - theta) * (v - theta);
    variance /= (n - 1);
  } else {
    for (int k = 0; k < folds.k_folds; ++k) theta += result.fold_score_means[k];
    theta /= folds.k_folds;
    for (int i = 0; i < n; ++i) variance += (g[i] - theta) * (g[i] - theta);
    variance /= (n - 1);
  }

  result.theta_hat = theta;
  const double sigma = std::sqrt(variance);
  result.std_error = sigma / std::sqrt(static_cast<double>(n));
  result.z_stat = result.std_error > 0.0 ? result.theta_hat / result.std_error : 0.0;
  result.p_value = normal_p_value(result.z_stat, options.sidedness);
  result.reject_at_05 = result.p_value < 0.05;
  return result;
}

ExposureChoice select_exposure(const TestResult& result, const ExposureVector& researcher,
                               const ExposureVector& learned) {
  ExposureChoice choice;
  if (result.inconclusive) {
    choice.exposure = learned;
    choice.used_learned = true;
    choice.warning = true;
  } else if (result.reject_at_05) {
    choice.exposure = learned;
    choice.used_learned = true;
  } else {
    choice.exposure = researcher;
  }
  return choice;
}

}  // namespace exmap
