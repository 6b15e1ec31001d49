#pragma once

#include <array>
#include <functional>
#include <vector>

#include "exmap/matrix.hpp"

namespace exmap {

enum class Estimand {
  MeanPotentialOutcome,  // E[Y(d, z)]
  DirectAtExposure,      // gamma(z)
  InterferenceContrast,  // delta(d, z, z')
  TotalContrast,         // Delta(z, z')
  DirectAverage,         // gamma = E[gamma(Z)]
};

enum class EffectMethod { Ipw, Dr };

struct EffectEstimate {
  Estimand estimand = Estimand::MeanPotentialOutcome;
  EffectMethod method = EffectMethod::Ipw;
  double estimate = 0.0;
  double std_error = 0.0;
  std::array<double, 2> ci_95{0.0, 0.0};
  int d = -1;
  int z = -1;
  int z_alt = -1;
};

// Joint propensity p(d, z) = Pr(D=d | X) * Pr(Z=z | others, graph).
// `treatment_prob` holds Pr(D=1 | X_i); `exposure_prob` holds the already
// oriented Pr(Z_i = z | .). Throws contract_violation when a factor leaves
// (0, 1).
std::vector<double> joint_propensity(int d, const std::vector<double>& treatment_prob,
                                     const std::vector<double>& exposure_prob);

// Inverse-probability-weighted mean potential outcome over the (d, z) cell.
// Plain form: sample mean of y * I{D=d, Z=z} / p. With `normalize` the
// weights are self-normalized within the cell, which is what the direct
// effect protocol uses. Standard errors come from the influence function.
// Throws empty_cell_error when no observation sits in the cell.
EffectEstimate ipw_mean_po(const std::vector<double>& y, const std::vector<int>& d_obs,
                           const std::vector<int>& z_obs, int d, int z,
                           const std::vector<double>& p, bool normalize = false);

// Doubly robust mean potential outcome: mu(d,z,x) plus the weighted
// residual correction. `mu` holds the fitted outcome model evaluated at
// (d, z, x_i) for every observation. With mu identically zero this reduces
// to the plain IPW form exactly.
EffectEstimate dr_mean_po(const std::vector<double>& y, const std::vector<int>& d_obs,
                          const std::vector<int>& z_obs, int d, int z,
                          const std::vector<double>& p, const std::vector<double>& mu);

// gamma(z), delta(d, z, z'), Delta(z, z') as arithmetic contrasts of mean
// potential outcomes with stacked influence-function standard errors.
// `propensity_for` maps (d, z) to the joint propensity vector; `mu_for` may
// be empty for IPW.
using PropensityProvider = std::function<std::vector<double>(int d, int z)>;
using OutcomeModelProvider = std::function<std::vector<double>(int d, int z)>;

EffectEstimate direct_effect_at(const std::vector<double>& y, const std::vector<int>& d_obs,
                                const std::vector<int>& z_obs, int z,
                                const PropensityProvider& propensity_for,
                                EffectMethod method = EffectMethod::Ipw,
                                const OutcomeModelProvider& mu_for = nullptr,
                                bool normalize = false);

EffectEstimate interference_effect(const std::vector<double>& y, const std::vector<int>& d_obs,
                                   const std::vector<int>& z_obs, int d, int z, int z_alt,
                                   const PropensityProvider& propensity_for,
                                   EffectMethod method = EffectMethod::Ipw,
                                   const OutcomeModelProvider& mu_for = nullptr,
                                   bool normalize = false);

EffectEstimate total_effect(const std::vector<double>& y, const std::vector<int>& d_obs,
                            const std::vector<int>& z_obs, int z, int z_alt,
                            const PropensityProvider& propensity_for,
                            EffectMethod method = EffectMethod::Ipw,
                            const OutcomeModelProvider& mu_for = nullptr,
                            bool normalize = false);

struct DirectAverageResult {
  EffectEstimate estimate;
  std::vector<int> dropped_cells;  // exposure levels without both treatment arms
  bool flagged = false;
};

// Exposure-frequency-weighted average of gamma(z) over the observed
// exposure levels `cells`. Cells missing either treatment arm are dropped
// and the weights renormalized; that is reported, never silent.
DirectAverageResult direct_effect_avg(const std::vector<double>& y,
                                      const std::vector<int>& d_obs,
                                      const std::vector<int>& z_obs,
                                      const std::vector<int>& cells,
                                      const PropensityProvider& propensity_for,
                                      EffectMethod method = EffectMethod::Ipw,
                                      const OutcomeModelProvider& mu_for = nullptr,
                                      bool normalize = true);

}  // namespace exmap
