#pragma once

#include <optional>
#include <vector>

#include "twfe/weights.hpp"

namespace twfe {

/// Minimal heterogeneity compatible with the coefficient having the opposite
/// sign of every treated cell's effect, with the profile attaining it.
struct OppositeSignBound {
  double value = 0.0;
  int s_index = 0;  // 1-based rank in the descending weight order
  std::vector<double> profile;  // per WeightTable entry, in table order
};

/// |beta| / sigma(w). Throws ZeroDispersion when sigma(w) = 0.
double sigma_lower(double beta, const WeightTable& weights);

/// The effect profile beta*(w-1)/sigma(w)^2 that has zero average and
/// reproduces beta; its dispersion equals sigma_lower. Throws ZeroDispersion.
std::vector<double> sigma_lower_profile(double beta, const WeightTable& weights);

/// Closed-form solution of
///   min  sum share*(D - mean D)^2
///   s.t. sum share*w*D = beta,  sign(D) opposite to beta for every cell.
/// Cells are ranked by weight (descending, ties by group then period); with
/// suffix sums P_k, S_k, T_k over that order, s is the first rank k >= 2 with
/// w_(k) < -S_k/(1-P_k) and the bound is |beta| / sqrt(T_s + S_s^2/(1-P_s)).
/// Throws ZeroBeta, NoNegativeWeight.
OppositeSignBound sigma_lower_lower(double beta, const WeightTable& weights);

struct RobustnessBounds {
  double beta = 0.0;
  double sigma_w = 0.0;
  std::optional<double> sigma_lower;
  std::optional<double> sigma_lower_lower;
  std::optional<int> s_index;
  std::optional<std::vector<double>> minimizing_profile;
};

/// Both measures, leaving undefined ones empty instead of throwing.
RobustnessBounds robustness_bounds(double beta, const WeightTable& weights);

}  // namespace twfe
