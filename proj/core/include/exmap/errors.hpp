#pragma once

#include <stdexcept>
#include <string>

namespace exmap {

// An exposure vector whose empirical quantiles collapse to a single cell.
class degenerate_partition_error : public std::runtime_error {
 public:
  explicit degenerate_partition_error(const std::string& what)
      : std::runtime_error(what) {}
};

// Non-finite loss encountered while optimizing.
class training_divergence_error : public std::runtime_error {
 public:
  explicit training_divergence_error(const std::string& what)
      : std::runtime_error(what) {}
};

// A caller handed us values outside a documented contract, e.g. a
// propensity at or beyond {0, 1}.
class contract_violation : public std::logic_error {
 public:
  explicit contract_violation(const std::string& what)
      : std::logic_error(what) {}
};

// No observations fall into a requested (treatment, exposure) cell.
class empty_cell_error : public std::runtime_error {
 public:
  explicit empty_cell_error(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace exmap
