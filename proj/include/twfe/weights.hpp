#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "twfe/panel.hpp"
#include "twfe/regression.hpp"

namespace twfe {

struct WeightEntry {
  int group = 0;   // CellTable group index
  int period = 0;  // CellTable period index
  double share = 0.0;  // N_{g,t} / N_1
  double weight = 0.0;

  /// share * weight: the coefficient the regression puts on this cell's
  /// effect. Contributions sum to one.
  double contribution() const noexcept { return share * weight; }
};

struct WeightSummary {
  int n_positive = 0;
  int n_negative = 0;
  int n_zero = 0;  // |weight| < 1e-12
  double sum_positive = 0.0;  // sum of share*weight over positive entries
  double sum_negative = 0.0;  // sum of share*weight over negative entries
  double sigma_w = 0.0;       // sqrt(sum share*(weight-1)^2)
};

/// Decomposition weights over the treated cells, in CellTable order.
struct WeightTable {
  EstimatorKind kind = EstimatorKind::Fe;
  std::vector<WeightEntry> entries;
  WeightSummary summary;
};

inline constexpr double kZeroWeightTolerance = 1e-12;

/// Fills `summary` from `entries`.
void summarize(WeightTable& table);

/// w_{g,t} = eps_{g,t} / sum_{treated} (N_{g,t}/N_1) eps_{g,t}.
/// Throws DegenerateNormalizer.
WeightTable fe_weights(const CellTable& cells, const FeResiduals& residuals);
WeightTable fe_weights(const CellTable& cells);

/// w_{fd,g,t} built from eps_{fd,g,t} - (N_{g,t+1}/N_{g,t}) eps_{fd,g,t+1},
/// normalized the same way. Throws DegenerateNormalizer.
WeightTable fd_weights(const CellTable& cells, const FdResiduals& residuals);
WeightTable fd_weights(const CellTable& cells);

struct MonotonicityViolation {
  enum class Kind { AcrossPeriods, AcrossGroups };
  Kind kind = Kind::AcrossPeriods;
  int group = 0;
  int other_group = 0;  // == group for AcrossPeriods
  int period = 0;
  int other_period = 0;  // == period for AcrossGroups
};

/// Checks that, within a group, periods with a larger treated share carry a
/// strictly smaller weight, and that, within a period, groups treated for
/// longer carry a strictly smaller weight. Needs common growth rates across
/// groups (PreconditionNotMet otherwise).
std::vector<MonotonicityViolation> check_weight_monotonicity(const CellTable& cells,
                                                            const WeightTable& weights);

struct SignViolation {
  int group = 0;
  int period = 0;
  bool predicted_negative = false;
  double weight = 0.0;
};

/// First-difference sign pattern in staggered designs with time-invariant
/// cell sizes: w_{fd,g,t} < 0 exactly when D_{g,t-1} = 1 and
/// D_{.,t} - D_{.,t-1} > D_{.,t+1} - D_{.,t} (with D_{.,T+1} = D_{.,T}).
/// Returns the cells where the computed sign disagrees.
/// Throws PreconditionNotMet outside that design class.
std::vector<SignViolation> check_fd_sign_pattern(const CellTable& cells, const WeightTable& fd);

/// Predicate side of the check above, for one treated cell.
bool fd_weight_predicted_negative(const CellTable& cells, int g, int t);

struct WeightCorrelation {
  double correlation = 0.0;
  double t_stat = 0.0;
  int n = 0;
};

/// Share-weighted Pearson correlation between weights and a per-entry
/// covariate, with t = r sqrt((n-2)/(1-r^2)).
/// Throws InvalidArgument (size mismatch or fewer than 3 entries),
/// ConstantCovariate, ZeroDispersion (constant weights).
WeightCorrelation correlate_weights(const WeightTable& weights, std::span<const double> covariate);

}  // namespace twfe
