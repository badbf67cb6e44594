#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "twfe/panel.hpp"

namespace twfe {

enum class EstimatorKind { Fe, Fd };

std::string_view to_string(EstimatorKind kind) noexcept;

/// Residuals of D_{g,t} on group and period fixed effects, N_{g,t}-weighted.
struct FeResiduals {
  int groups = 0;
  int periods = 0;
  std::vector<double> eps;  // row-major, same layout as CellTable
  int sweeps = 0;           // alternating-projection sweeps performed
  bool used_direct_solve = false;

  double at(int g, int t) const {
    return eps[static_cast<std::size_t>(g) * periods + static_cast<std::size_t>(t)];
  }
};

/// Residuals of D_{g,t} - D_{g,t-1} on period fixed effects over t >= 2,
/// N_{g,t}-weighted. The first period and the period after the last hold 0.
struct FdResiduals {
  int groups = 0;
  int periods = 0;
  std::vector<double> eps;  // row-major; column 0 is identically zero

  double at(int g, int t) const {
    if (t <= 0 || t >= periods) return 0.0;
    return eps[static_cast<std::size_t>(g) * periods + static_cast<std::size_t>(t)];
  }
};

struct RegressionEstimate {
  double beta = 0.0;
  EstimatorKind kind = EstimatorKind::Fe;
  std::int64_t n_obs = 0;
  bool degenerate = false;
};

/// Throws Collinear when D is explained by the fixed effects.
FeResiduals residualize_fe(const CellTable& cells);

/// Frisch-Waugh ratio sum N*eps*Y / sum N*eps*D. Throws Collinear.
RegressionEstimate beta_fe(const CellTable& cells);
RegressionEstimate beta_fe(const CellTable& cells, const FeResiduals& residuals);

/// Throws Collinear when D_{g,t} - D_{g,t-1} is constant within every period,
/// InvalidArgument when T < 2.
FdResiduals residualize_fd(const CellTable& cells);

RegressionEstimate beta_fd(const CellTable& cells);
RegressionEstimate beta_fd(const CellTable& cells, const FdResiduals& residuals);

/// Non-throwing variants: a collinear design yields degenerate = true and a
/// NaN coefficient.
RegressionEstimate try_beta_fe(const CellTable& cells);
RegressionEstimate try_beta_fd(const CellTable& cells);

/// Closed-form residual D_{g,t} - D_{g,.} - D_{.,t} + D_{.,.}; equals the
/// regression residual whenever growth rates are common across groups.
std::vector<double> closed_form_fe_residuals(const CellTable& cells);

}  // namespace twfe
