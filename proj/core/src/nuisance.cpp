#include "exmap/nuisance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace exmap {

FoldScheme make_folds(int n, int k, Rng& rng) {
  if (k < 2) throw std::invalid_argument("make_folds: need at least two folds");
  if (k > n) throw std::invalid_argument("make_folds: more folds than observations");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates with the project rng so assignments are reproducible.
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(uniform01(rng) * (i + 1));
    std::swap(order[i], order[std::min(j, i)]);
  }
  FoldScheme f;
  f.k_folds = k;
  f.assignment.resize(n);
  for (int pos = 0; pos < n; ++pos) f.assignment[order[pos]] = pos % k;
  return f;
}

double LogisticFit::predict(const std::vector<double>& row) const {
  if (fell_back) return fallback_rate;
  double t = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) t += beta[j] * row[j];
  return 1.0 / (1.0 + std::exp(-t));
}

LogisticFit fit_logistic(const std::vector<std::vector<double>>& rows,
                         const std::vector<int>& labels) {
  LogisticFit fit;
  const int n = static_cast<int>(rows.size());
  if (n == 0) {
    fit.fell_back = true;
    fit.fallback_rate = 0.5;
    return fit;
  }
  const int p = static_cast<int>(rows[0].size());
  fit.beta.assign(p, 0.0);

  double rate = 0.0;
  for (int v : labels) rate += v;
  rate /= n;
  fit.fallback_rate = rate;
  if (rate == 0.0 || rate == 1.0) {
    fit.fell_back = true;
    return fit;
  }

  constexpr int kMaxIter = 100;
  constexpr double kGradTol = 1e-8;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    std::vector<double> grad(p, 0.0);
    RealMatrix hess(p, p);
    for (int i = 0; i < n; ++i) {
      double t = 0.0;
      for (int j = 0; j < p; ++j) t += fit.beta[j] * rows[i][j];
      const double mu = 1.0 / (1.0 + std::exp(-t));
      const double w = mu * (1.0 - mu);
      const double r = labels[i] - mu;
      for (int j = 0; j < p; ++j) {
        grad[j] += r * rows[i][j];
        for (int k = 0; k <= j; ++k) hess(j, k) += w * rows[i][j] * rows[i][k];
      }
    }
    for (int j = 0; j < p; ++j)
      for (int k = j + 1; k < p; ++k) hess(j, k) = hess(k, j);

    double gmax = 0.0;
    for (double gj : grad) gmax = std::max(gmax, std::abs(gj));
    if (gmax < kGradTol) return fit;

    std::vector<double> step;
    if (!solve_linear(hess, grad, step)) break;
    bool finite = true;
    for (int j = 0; j < p; ++j) {
      fit.beta[j] += step[j];
      if (!std::isfinite(fit.beta[j])) finite = false;
    }
    if (!finite) break;
  }

  // No convergence: separation or a degenerate design. Accept the last
  // iterate if it is usable, otherwise fall back to the marginal rate.
  for (double b : fit.beta)
    if (!std::isfinite(b)) {
      fit.fell_back = true;
      return fit;
    }
  return fit;
}

std::vector<double> fit_treatment_propensity(const std::vector<int>& d,
                                             const std::vector<int>& x,
                                             const FoldScheme& folds) {
  const int n = static_cast<int>(d.size());
  if (static_cast<int>(x.size()) != n || static_cast<int>(folds.assignment.size()) != n)
    throw std::invalid_argument("fit_treatment_propensity: length mismatch");

  std::vector<double> out(n, 0.0);
  for (int fold = 0; fold < folds.k_folds; ++fold) {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) {
      if (folds.assignment[i] == fold) continue;
      rows.push_back({1.0, static_cast<double>(x[i])});
      labels.push_back(d[i]);
    }
    const LogisticFit fit = fit_logistic(rows, labels);
    for (int i = 0; i < n; ++i)
      if (folds.assignment[i] == fold)
        out[i] = trim_probability(fit.predict({1.0, static_cast<double>(x[i])}));
  }
  return out;
}

std::vector<double> oracle_exposure_propensity(const Graph& g, const std::vector<int>& x,
                                               int threshold) {
  if (static_cast<int>(x.size()) != g.n)
    throw std::invalid_argument("oracle_exposure_propensity: length mismatch");
  if (threshold < 0) throw std::invalid_argument("oracle_exposure_propensity: threshold < 0");

  const double p = 1.0 / (1.0 + std::exp(-3.0));  // Pr(D=1 | X=1)
  const double logp = std::log(p);
  const double log1p_ = std::log1p(-p);

  std::vector<double> out(g.n, 0.0);
  for (int i = 0; i < g.n; ++i) {
    int m = 0;
    for (int j : g.neighbors[i]) m += x[j];
    if (m <= threshold) continue;  // upper tail is empty
    // Complement over k = 0..threshold in log space; robust for large m.
    double below = 0.0;
    for (int k = 0; k <= threshold; ++k) {
      const double logc = std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0);
      below += std::exp(logc + k * logp + (m - k) * log1p_);
    }
    out[i] = std::max(0.0, 1.0 - below);
  }
  return out;
}

namespace {

std::vector<double> design_row(const ExposureVector& zdot, int i, ExposureDesign design) {
  const double z = zdot.values[i];
  if (design == ExposureDesign::Quadratic && !zdot.is_binary()) return {1.0, z, z * z};
  return {1.0, z};
}

struct OlsFit {
  std::vector<double> beta;
  bool ok = false;
  double predict(const std::vector<double>& row) const {
    double t = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) t += beta[j] * row[j];
    return t;
  }
};

OlsFit fit_ols(const std::vector<std::vector<double>>& rows, const std::vector<double>& y) {
  OlsFit fit;
  if (rows.empty()) return fit;
  const int p = static_cast<int>(rows[0].size());
  RealMatrix xtx(p, p);
  std::vector<double> xty(p, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < p; ++j) {
      xty[j] += rows[i][j] * y[i];
      for (int k = 0; k <= j; ++k) xtx(j, k) += rows[i][j] * rows[i][k];
    }
  }
  for (int j = 0; j < p; ++j)
    for (int k = j + 1; k < p; ++k) xtx(j, k) = xtx(k, j);
  fit.ok = solve_linear(xtx, xty, fit.beta);
  return fit;
}

}  // namespace

CellMeanFit fit_cell_means(const std::vector<double>& y, const ExposureVector& zdot,
                           const Partition& partition, const FoldScheme& folds,
                           ExposureDesign design) {
  const int n = static_cast<int>(y.size());
  const int L = partition.cell_count;
  CellMeanFit result;
  result.in_means = RealMatrix(n, L);
  result.out_means = RealMatrix(n, L);

  // Full-sample per-cell fits, used only when a fold's training cell is empty.
  std::vector<OlsFit> global_in(L), global_out(L);
  for (int l = 0; l < L; ++l) {
    std::vector<std::vector<double>> rows_in, rows_out;
    std::vector<double> y_in, y_out;
    for (int i = 0; i < n; ++i) {
      if (partition.labels[i] == l + 1) {
        rows_in.push_back(design_row(zdot, i, design));
        y_in.push_back(y[i]);
      } else {
        rows_out.push_back(design_row(zdot, i, design));
        y_out.push_back(y[i]);
      }
    }
    global_in[l] = fit_ols(rows_in, y_in);
    global_out[l] = fit_ols(rows_out, y_out);
  }

  for (int fold = 0; fold < folds.k_folds; ++fold) {
    for (int l = 0; l < L; ++l) {
      std::vector<std::vector<double>> rows_in, rows_out;
      std::vector<double> y_in, y_out;
      for (int i = 0; i < n; ++i) {
        if (folds.assignment[i] == fold) continue;
        if (partition.labels[i] == l + 1) {
          rows_in.push_back(design_row(zdot, i, design));
          y_in.push_back(y[i]);
        } else {
          rows_out.push_back(design_row(zdot, i, design));
          y_out.push_back(y[i]);
        }
      }
      OlsFit fit_in = fit_ols(rows_in, y_in);
      OlsFit fit_out = fit_ols(rows_out, y_out);
      if (!fit_in.ok) {
        fit_in = global_in[l];
        result.merged = true;
      }
      if (!fit_out.ok) {
        fit_out = global_out[l];
        result.merged = true;
      }
      for (int i = 0; i < n; ++i) {
        if (folds.assignment[i] != fold) continue;
        const auto row = design_row(zdot, i, design);
        result.in_means(i, l) = fit_in.ok ? fit_in.predict(row) : 0.0;
        result.out_means(i, l) = fit_out.ok ? fit_out.predict(row) : 0.0;
      }
    }
  }
  return result;
}

RealMatrix fit_cell_propensity(const ExposureVector& zdot, const Partition& partition,
                               const FoldScheme& folds, ExposureDesign design) {
  const int n = static_cast<int>(zdot.values.size());
  const int L = partition.cell_count;
  RealMatrix out(n, L);

  for (int fold = 0; fold < folds.k_folds; ++fold) {
    for (int l = 0; l < L; ++l) {
      std::vector<std::vector<double>> rows;
      std::vector<int> labels;
      for (int i = 0; i < n; ++i) {
        if (folds.assignment[i] == fold) continue;
        rows.push_back(design_row(zdot, i, design));
        labels.push_back(partition.labels[i] == l + 1 ? 1 : 0);
      }
      const LogisticFit fit = fit_logistic(rows, labels);
      for (int i = 0; i < n; ++i)
        if (folds.assignment[i] == fold)
          out(i, l) = trim_probability(fit.predict(design_row(zdot, i, design)));
    }
  }
  return out;
}

}  // namespace exmap
