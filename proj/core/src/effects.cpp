#include "exmap/effects.hpp"

#include <cmath>
#include <stdexcept>

#include "exmap/errors.hpp"

namespace exmap {

namespace {

// Point estimate plus per-observation influence contributions, so contrasts
// and weighted averages can stack their standard errors correctly.
struct MeanPo {
  double estimate = 0.0;
  std::vector<double> influence;
};

double sd_over_sqrt_n(const std::vector<double>& influence) {
  const int n = static_cast<int>(influence.size());
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double v : influence) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : influence) var += (v - mean) * (v - mean);
  var /= (n - 1);
  return std::sqrt(var / n);
}

MeanPo mean_po_core(const std::vector<double>& y, const std::vector<int>& d_obs,
                    const std::vector<int>& z_obs, int d, int z, const std::vector<double>& p,
                    const std::vector<double>* mu, bool normalize) {
  const int n = static_cast<int>(y.size());
  if (static_cast<int>(d_obs.size()) != n || static_cast<int>(z_obs.size()) != n ||
      static_cast<int>(p.size()) != n)
    throw std::invalid_argument("mean_po: input lengths disagree");
  if (mu && static_cast<int>(mu->size()) != n)
    throw std::invalid_argument("mean_po: outcome model length disagrees");

  int cell_count = 0;
  for (int i = 0; i < n; ++i) {
    if (!(p[i] > 0.0 && p[i] <= 1.0))
      throw contract_violation("mean_po: propensity outside (0,1]; trim first");
    if (d_obs[i] == d && z_obs[i] == z) ++cell_count;
  }
  if (cell_count == 0)
    throw empty_cell_error("mean_po: no observations with D=" + std::to_string(d) +
                           ", Z=" + std::to_string(z));

  MeanPo out;
  out.influence.resize(n);
  if (!normalize) {
    // phi_i = mu_i + I/p * (y_i - mu_i); mu absent means plain weighting.
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
      const double ind = (d_obs[i] == d && z_obs[i] == z) ? 1.0 : 0.0;
      const double base = mu ? (*mu)[i] : 0.0;
      const double phi = base + ind / p[i] * (y[i] - base);
      out.influence[i] = phi;
      mean += phi;
    }
    out.estimate = mean / n;
    for (double& v : out.influence) v -= out.estimate;
  } else {
    double wsum = 0.0, wysum = 0.0, musum = 0.0;
    std::vector<double> w(n, 0.0);
    for (int i = 0; i < n; ++i) {
      const double ind = (d_obs[i] == d && z_obs[i] == z) ? 1.0 : 0.0;
      w[i] = ind / p[i];
      const double base = mu ? (*mu)[i] : 0.0;
      wsum += w[i];
      wysum += w[i] * (y[i] - base);
      musum += base;
    }
    const double correction = wysum / wsum;
    out.estimate = musum / n + correction;
    const double wbar = wsum / n;
    for (int i = 0; i < n; ++i) {
      const double base = mu ? (*mu)[i] : 0.0;
      out.influence[i] = (base - musum / n) + w[i] * (y[i] - base - correction) / wbar;
    }
  }
  return out;
}

EffectEstimate finish(Estimand estimand, EffectMethod method, double estimate,
                      const std::vector<double>& influence, int d, int z, int z_alt) {
  EffectEstimate e;
  e.estimand = estimand;
  e.method = method;
  e.estimate = estimate;
  e.std_error = sd_over_sqrt_n(influence);
  e.ci_95 = {estimate - 1.96 * e.std_error, estimate + 1.96 * e.std_error};
  e.d = d;
  e.z = z;
  e.z_alt = z_alt;
  return e;
}

MeanPo mean_po_dispatch(const std::vector<double>& y, const std::vector<int>& d_obs,
                        const std::vector<int>& z_obs, int d, int z,
                        const PropensityProvider& propensity_for, EffectMethod method,
                        const OutcomeModelProvider& mu_for, bool normalize) {
  const std::vector<double> p = propensity_for(d, z);
  if (method == EffectMethod::Dr) {
    if (!mu_for) throw std::invalid_argument("mean_po: DR requested without an outcome model");
    const std::vector<double> mu = mu_for(d, z);
    return mean_po_core(y, d_obs, z_obs, d, z, p, &mu, normalize);
  }
  return mean_po_core(y, d_obs, z_obs, d, z, p, nullptr, normalize);
}

std::vector<double> diff(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

}  // namespace

std::vector<double> joint_propensity(int d, const std::vector<double>& treatment_prob,
                                     const std::vector<double>& exposure_prob) {
  if (treatment_prob.size() != exposure_prob.size())
    throw std::invalid_argument("joint_propensity: lengths disagree");
  std::vector<double> out(treatment_prob.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double t = treatment_prob[i];
    const double e = exposure_prob[i];
    if (!(t > 0.0 && t < 1.0) || !(e > 0.0 && e < 1.0))
      throw contract_violation("joint_propensity: factor outside (0,1)");
    out[i] = (d == 1 ? t : 1.0 - t) * e;
  }
  return out;
}

EffectEstimate ipw_mean_po(const std::vector<double>& y, const std::vector<int>& d_obs,
                           const std::vector<int>& z_obs, int d, int z,
                           const std::vector<double>& p, bool normalize) {
  const MeanPo m = mean_po_core(y, d_obs, z_obs, d, z, p, nullptr, normalize);
  return finish(Estimand::MeanPotentialOutcome, EffectMethod::Ipw, m.estimate, m.influence, d, z, -1);
}

EffectEstimate dr_mean_po(const std::vector<double>& y, const std::vector<int>& d_obs,
                          const std::vector<int>& z_obs, int d, int z,
                          const std::vector<double>& p, const std::vector<double>& mu) {
  const MeanPo m = mean_po_core(y, d_obs, z_obs, d, z, p, &mu, false);
  return finish(Estimand::MeanPotentialOutcome, EffectMethod::Dr, m.estimate, m.influence, d, z, -1);
}

EffectEstimate direct_effect_at(const std::vector<double>& y, const std::vector<int>& d_obs,
                                const std::vector<int>& z_obs, int z,
                                const PropensityProvider& propensity_for, EffectMethod method,
                                const OutcomeModelProvider& mu_for, bool normalize) {
  const MeanPo treated = mean_po_dispatch(y, d_obs, z_obs, 1, z, propensity_for, method, mu_for, normalize);
  const MeanPo control = mean_po_dispatch(y, d_obs, z_obs, 0, z, propensity_for, method, mu_for, normalize);
  return finish(Estimand::DirectAtExposure, method, treated.estimate - control.estimate,
                diff(treated.influence, control.influence), -1, z, -1);
}

EffectEstimate interference_effect(const std::vector<double>& y, const std::vector<int>& d_obs,
                                   const std::vector<int>& z_obs, int d, int z, int z_alt,
                                   const PropensityProvider& propensity_for, EffectMethod method,
                                   const OutcomeModelProvider& mu_for, bool normalize) {
  const MeanPo hi = mean_po_dispatch(y, d_obs, z_obs, d, z, propensity_for, method, mu_for, normalize);
  const MeanPo lo = mean_po_dispatch(y, d_obs, z_obs, d, z_alt, propensity_for, method, mu_for, normalize);
  return finish(Estimand::InterferenceContrast, method, hi.estimate - lo.estimate,
                diff(hi.influence, lo.influence), d, z, z_alt);
}

EffectEstimate total_effect(const std::vector<double>& y, const std::vector<int>& d_obs,
                            const std::vector<int>& z_obs, int z, int z_alt,
                            const PropensityProvider& propensity_for, EffectMethod method,
                            const OutcomeModelProvider& mu_for, bool normalize) {
  const MeanPo hi = mean_po_dispatch(y, d_obs, z_obs, 1, z, propensity_for, method, mu_for, normalize);
  const MeanPo lo = mean_po_dispatch(y, d_obs, z_obs, 0, z_alt, propensity_for, method, mu_for, normalize);
  return finish(Estimand::TotalContrast, method, hi.estimate - lo.estimate,
                diff(hi.influence, lo.influence), -1, z, z_alt);
}

DirectAverageResult direct_effect_avg(const std::vector<double>& y,
                                      const std::vector<int>& d_obs,
                                      const std::vector<int>& z_obs,
                                      const std::vector<int>& cells,
                                      const PropensityProvider& propensity_for,
                                      EffectMethod method, const OutcomeModelProvider& mu_for,
                                      bool normalize) {
  const int n = static_cast<int>(y.size());
  if (cells.empty()) throw std::invalid_argument("direct_effect_avg: no exposure cells");

  DirectAverageResult result;
  struct CellPiece {
    int z;
    double weight;
    double gamma;
    std::vector<double> influence;
  };
  std::vector<CellPiece> pieces;

  for (int z : cells) {
    int freq = 0;
    bool has_treated = false, has_control = false;
    for (int i = 0; i < n; ++i) {
      if (z_obs[i] == z) {
        ++freq;
        (d_obs[i] == 1 ? has_treated : has_control) = true;
      }
    }
    if (freq == 0 || !has_treated || !has_control) {
      result.dropped_cells.push_back(z);
      result.flagged = true;
      continue;
    }
    const MeanPo treated = mean_po_dispatch(y, d_obs, z_obs, 1, z, propensity_for, method, mu_for, normalize);
    const MeanPo control = mean_po_dispatch(y, d_obs, z_obs, 0, z, propensity_for, method, mu_for, normalize);
    CellPiece piece;
    piece.z = z;
    piece.weight = static_cast<double>(freq) / n;
    piece.gamma = treated.estimate - control.estimate;
    piece.influence = diff(treated.influence, control.influence);
    pieces.push_back(std::move(piece));
  }
  if (pieces.empty()) throw empty_cell_error("direct_effect_avg: every exposure cell was dropped");

  double wtotal = 0.0;
  for (const auto& piece : pieces) wtotal += piece.weight;

  double gamma_avg = 0.0;
  for (const auto& piece : pieces) gamma_avg += piece.weight / wtotal * piece.gamma;

  // Stacked influence: the weighted per-cell contrasts plus the variation
  // of the empirical cell weights themselves.
  std::vector<double> influence(n, 0.0);
  for (const auto& piece : pieces) {
    const double wz = piece.weight / wtotal;
    for (int i = 0; i < n; ++i) {
      influence[i] += wz * piece.influence[i];
      const double ind = z_obs[i] == piece.z ? 1.0 : 0.0;
      influence[i] += (piece.gamma - gamma_avg) * (ind - piece.weight) / wtotal;
    }
  }

  result.estimate = finish(Estimand::DirectAverage, method, gamma_avg, influence, -1, -1, -1);
  return result;
}

}  // namespace exmap
