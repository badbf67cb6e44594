#include "twfe/regression.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "twfe/error.hpp"
#include "twfe/summation.hpp"

namespace twfe {
namespace {

constexpr double kSweepTolerance = 1e-12;
constexpr int kMaxSweeps = 10'000;
constexpr double kCollinearTolerance = 1e-12;

// Weighted least squares of D on group and period dummies through the normal
// equations; period 0 is the reference level.
std::vector<double> direct_fe_residuals(const CellTable& cells) {
  const int G = cells.groups();
  const int T = cells.periods();
  const int k = G + T - 1;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(k, k);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  for (int g = 0; g < G; ++g) {
    for (int t = 0; t < T; ++t) {
      const double n = static_cast<double>(cells.count(g, t));
      const double d = cells.treatment(g, t);
      M(g, g) += n;
      rhs(g) += n * d;
      if (t > 0) {
        const int j = G + t - 1;
        M(j, j) += n;
        M(g, j) += n;
        M(j, g) += n;
        rhs(j) += n * d;
      }
    }
  }
  const Eigen::VectorXd coef = M.ldlt().solve(rhs);
  std::vector<double> eps(cells.size());
  for (int g = 0; g < G; ++g)
    for (int t = 0; t < T; ++t)
      eps[cells.index(g, t)] =
          cells.treatment(g, t) - coef(g) - (t > 0 ? coef(G + t - 1) : 0.0);
  return eps;
}

bool denominator_vanishes(double denominator, double scale) {
  return !(std::abs(denominator) > kCollinearTolerance * scale);
}

}  // namespace

std::string_view to_string(EstimatorKind kind) noexcept {
  return kind == EstimatorKind::Fe ? "fe" : "fd";
}

FeResiduals residualize_fe(const CellTable& cells) {
  const int G = cells.groups();
  const int T = cells.periods();
  FeResiduals out;
  out.groups = G;
  out.periods = T;
  out.eps.resize(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) out.eps[i] = cells.treatments()[i];

  bool converged = false;
  for (int sweep = 1; sweep <= kMaxSweeps; ++sweep) {
    double max_change = 0.0;
    for (int g = 0; g < G; ++g) {
      CompensatedSum acc;
      for (int t = 0; t < T; ++t) acc += static_cast<double>(cells.count(g, t)) * out.eps[cells.index(g, t)];
      const double mean = acc.value() / static_cast<double>(cells.group_count(g));
      for (int t = 0; t < T; ++t) out.eps[cells.index(g, t)] -= mean;
      max_change = std::max(max_change, std::abs(mean));
    }
    for (int t = 0; t < T; ++t) {
      CompensatedSum acc;
      for (int g = 0; g < G; ++g) acc += static_cast<double>(cells.count(g, t)) * out.eps[cells.index(g, t)];
      const double mean = acc.value() / static_cast<double>(cells.period_count(t));
      for (int g = 0; g < G; ++g) out.eps[cells.index(g, t)] -= mean;
      max_change = std::max(max_change, std::abs(mean));
    }
    out.sweeps = sweep;
    if (max_change < kSweepTolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    out.eps = direct_fe_residuals(cells);
    out.used_direct_solve = true;
  }

  CompensatedSum denominator, scale;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double n = static_cast<double>(cells.counts()[i]);
    denominator += n * out.eps[i] * cells.treatments()[i];
    scale += n * std::abs(static_cast<double>(cells.treatments()[i]));
  }
  if (denominator_vanishes(denominator.value(), scale.value()))
    throw Error(ErrorCode::Collinear,
                "treatment is collinear with the group and period fixed effects");
  return out;
}

RegressionEstimate beta_fe(const CellTable& cells, const FeResiduals& residuals) {
  // Residuals sum to zero, so centering Y changes nothing in exact
  // arithmetic; it keeps a constant outcome from leaking rounding noise.
  CompensatedSum y_total;
  for (std::size_t i = 0; i < cells.size(); ++i)
    y_total += static_cast<double>(cells.counts()[i]) * cells.outcomes()[i];
  const double y_mean = y_total.value() / static_cast<double>(cells.total_count());
  CompensatedSum numerator, denominator, scale;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double weighted = static_cast<double>(cells.counts()[i]) * residuals.eps[i];
    numerator += weighted * (cells.outcomes()[i] - y_mean);
    denominator += weighted * cells.treatments()[i];
    scale += static_cast<double>(cells.counts()[i]) * cells.treatments()[i];
  }
  if (denominator_vanishes(denominator.value(), scale.value()))
    throw Error(ErrorCode::Collinear,
                "treatment is collinear with the group and period fixed effects");
  return {numerator.value() / denominator.value(), EstimatorKind::Fe, cells.total_count(), false};
}

RegressionEstimate beta_fe(const CellTable& cells) {
  return beta_fe(cells, residualize_fe(cells));
}

FdResiduals residualize_fd(const CellTable& cells) {
  const int G = cells.groups();
  const int T = cells.periods();
  if (T < 2) throw Error(ErrorCode::InvalidArgument, "first differences need at least two periods");
  FdResiduals out;
  out.groups = G;
  out.periods = T;
  out.eps.assign(cells.size(), 0.0);

  CompensatedSum denominator, scale;
  for (int t = 1; t < T; ++t) {
    CompensatedSum acc;
    for (int g = 0; g < G; ++g)
      acc += static_cast<double>(cells.count(g, t) * (cells.treatment(g, t) - cells.treatment(g, t - 1)));
    const double mean = acc.value() / static_cast<double>(cells.period_count(t));
    for (int g = 0; g < G; ++g) {
      const double delta = cells.treatment(g, t) - cells.treatment(g, t - 1);
      const double e = delta - mean;
      out.eps[cells.index(g, t)] = e;
      denominator += static_cast<double>(cells.count(g, t)) * e * delta;
      scale += static_cast<double>(cells.count(g, t)) * std::abs(delta);
    }
  }
  if (denominator_vanishes(denominator.value(), scale.value()))
    throw Error(ErrorCode::Collinear,
                "treatment change is collinear with the period fixed effects");
  return out;
}

RegressionEstimate beta_fd(const CellTable& cells, const FdResiduals& residuals) {
  CompensatedSum numerator, denominator, scale;
  std::int64_t n_obs = 0;
  for (int g = 0; g < cells.groups(); ++g) {
    for (int t = 1; t < cells.periods(); ++t) {
      const double n = static_cast<double>(cells.count(g, t));
      const double e = residuals.at(g, t);
      const double dd = cells.treatment(g, t) - cells.treatment(g, t - 1);
      numerator += n * e * (cells.outcome(g, t) - cells.outcome(g, t - 1));
      denominator += n * e * dd;
      scale += n * std::abs(dd);
      n_obs += cells.count(g, t);
    }
  }
  if (denominator_vanishes(denominator.value(), scale.value()))
    throw Error(ErrorCode::Collinear,
                "treatment change is collinear with the period fixed effects");
  return {numerator.value() / denominator.value(), EstimatorKind::Fd, n_obs, false};
}

RegressionEstimate beta_fd(const CellTable& cells) {
  return beta_fd(cells, residualize_fd(cells));
}

RegressionEstimate try_beta_fe(const CellTable& cells) {
  try {
    return beta_fe(cells);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Collinear) throw;
    return {std::numeric_limits<double>::quiet_NaN(), EstimatorKind::Fe, cells.total_count(), true};
  }
}

RegressionEstimate try_beta_fd(const CellTable& cells) {
  try {
    return beta_fd(cells);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Collinear) throw;
    return {std::numeric_limits<double>::quiet_NaN(), EstimatorKind::Fd,
            cells.total_count() - cells.period_count(0), true};
  }
}

std::vector<double> closed_form_fe_residuals(const CellTable& cells) {
  std::vector<double> eps(cells.size());
  for (int g = 0; g < cells.groups(); ++g)
    for (int t = 0; t < cells.periods(); ++t)
      eps[cells.index(g, t)] = cells.treatment(g, t) - cells.group_treatment_mean(g) -
                               cells.period_treatment_mean(t) + cells.treatment_mean();
  return eps;
}

}  // namespace twfe
