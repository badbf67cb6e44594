#pragma once

#include <optional>
#include <string>
#include <vector>

#include "twfe/panel.hpp"

namespace twfe {

/// Scalar estimators that the bootstrap and the Monte Carlo harness can
/// recompute on resampled or simulated panels.
struct EstimatorId {
  enum class Kind { Fe, Fd, Didm, Joiners, Leavers, Placebo };
  Kind kind = Kind::Fe;
  int horizon = 0;  // placebo only

  std::string name() const;
  bool operator==(const EstimatorId&) const = default;
};

/// Parses "fe", "fd", "didm", "joiners", "leavers", "placebo" (horizon 1) or
/// "placeboK" / "placebo_K". Throws InvalidArgument.
EstimatorId parse_estimator(const std::string& text);
/// Comma-separated list.
std::vector<EstimatorId> parse_estimators(const std::string& text);

/// Throws the estimator's own error (Collinear, NoSwitchers, ...).
double compute_estimator(const CellTable& cells, const EstimatorId& id);

/// std::nullopt when the estimator is undefined on this panel.
std::optional<double> try_compute_estimator(const CellTable& cells, const EstimatorId& id);

}  // namespace twfe
