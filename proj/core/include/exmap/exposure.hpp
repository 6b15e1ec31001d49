#pragma once

#include <string>
#include <vector>

#include "exmap/graph.hpp"

namespace exmap {

// RatioShare: covariate-weighted share of treated direct neighbors.
// BinaryAnyTreated: indicator of at least one treated covariate-positive
// neighbor. Learned / TrueOracle tag vectors produced elsewhere.
enum class ExposureKind { RatioShare, BinaryAnyTreated, Learned, TrueOracle };

struct ExposureVector {
  std::vector<double> values;
  ExposureKind kind = ExposureKind::Learned;

  bool is_binary() const { return kind == ExposureKind::BinaryAnyTreated; }
};

ExposureVector researcher_exposure(ExposureKind kind, const Graph& g,
                                   const std::vector<int>& d, const std::vector<int>& x);

// L quantile cells over the support of a continuous exposure. Cells are
// right-closed: cell l covers (edges[l-2], edges[l-1]], with open ends at
// the extremes. Duplicate cut points collapse, shrinking the effective
// cell count; labels are 1-based.
struct Partition {
  int cell_count = 0;
  std::vector<double> edges;
  std::vector<int> labels;
};

// Cut points at the k/L empirical quantiles (order statistic at ceil(k*n/L)).
// Throws degenerate_partition_error when no valid interior cut survives.
Partition quantile_partition(const ExposureVector& v, int L);

// 0/1 membership sequence for cell l (1-based). Exactly one indicator
// fires per observation across l = 1..cell_count.
std::vector<int> cell_indicator(const Partition& p, int l);

}  // namespace exmap
