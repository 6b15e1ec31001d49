#include "exmap/exposure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "exmap/errors.hpp"

namespace exmap {

ExposureVector researcher_exposure(ExposureKind kind, const Graph& g,
                                   const std::vector<int>& d, const std::vector<int>& x) {
  if (static_cast<int>(d.size()) != g.n || static_cast<int>(x.size()) != g.n)
    throw std::invalid_argument("researcher_exposure: sequence lengths must match the graph");

  ExposureVector out;
  out.kind = kind;
  out.values.resize(g.n, 0.0);
  switch (kind) {
    case ExposureKind::RatioShare:
      for (int i = 0; i < g.n; ++i) {
        const auto& nb = g.neighbors[i];
        if (nb.empty()) continue;  // 0/0 := 0
        int hits = 0;
        for (int j : nb) hits += d[j] * x[j];
        out.values[i] = static_cast<double>(hits) / static_cast<double>(nb.size());
      }
      break;
    case ExposureKind::BinaryAnyTreated:
      for (int i = 0; i < g.n; ++i) {
        for (int j : g.neighbors[i]) {
          if (d[j] * x[j] > 0) {
            out.values[i] = 1.0;
            break;
          }
        }
      }
      break;
    default:
      throw std::invalid_argument("researcher_exposure: kind must be a researcher-defined mapping");
  }
  return out;
}

Partition quantile_partition(const ExposureVector& v, int L) {
  const int n = static_cast<int>(v.values.size());
  if (L < 2) throw std::invalid_argument("quantile_partition: L must be >= 2");
  if (n < L) throw std::invalid_argument("quantile_partition: need at least L observations");

  std::vector<double> sorted = v.values;
  std::sort(sorted.begin(), sorted.end());
  const double maxv = sorted.back();

  // Candidate cuts at the k/L order statistics; drop duplicates and any cut
  // that equals the maximum (its upper cell would be empty).
  std::vector<double> cuts;
  for (int k = 1; k < L; ++k) {
    const int idx = static_cast<int>(std::ceil(static_cast<double>(k) * n / L)) - 1;
    const double c = sorted[idx];
    if (c >= maxv) continue;
    if (cuts.empty() || c > cuts.back()) cuts.push_back(c);
  }
  if (cuts.empty())
    throw degenerate_partition_error("quantile_partition: support collapses to a single cell");

  Partition p;
  p.edges = std::move(cuts);
  p.cell_count = static_cast<int>(p.edges.size()) + 1;
  p.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    // Right-closed cells: ties at a cut point go to the lower cell.
    const auto it = std::lower_bound(p.edges.begin(), p.edges.end(), v.values[i]);
    p.labels[i] = static_cast<int>(it - p.edges.begin()) + 1;
  }
  return p;
}

std::vector<int> cell_indicator(const Partition& p, int l) {
  if (l < 1 || l > p.cell_count) throw std::out_of_range("cell_indicator: cell index out of range");
  std::vector<int> ind(p.labels.size(), 0);
  for (std::size_t i = 0; i < p.labels.size(); ++i) ind[i] = p.labels[i] == l ? 1 : 0;
  return ind;
}

}  // namespace exmap
