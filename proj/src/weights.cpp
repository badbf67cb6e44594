#include "twfe/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "twfe/error.hpp"
#include "twfe/summation.hpp"

namespace twfe {
namespace {

constexpr double kNormalizerTolerance = 1e-12;
constexpr double kShareTieTolerance = 1e-12;
constexpr double kNegativeWeightTolerance = 1e-9;

// Builds a normalized table from per-treated-cell raw numerators.
WeightTable normalize(const CellTable& cells, EstimatorKind kind,
                      const std::vector<double>& numerators) {
  if (cells.treated_count() == 0)
    throw Error(ErrorCode::DegenerateNormalizer, "no treated cells");
  const double n1 = static_cast<double>(cells.treated_count());

  WeightTable table;
  table.kind = kind;
  CompensatedSum normalizer, scale;
  std::size_t k = 0;
  for (int g = 0; g < cells.groups(); ++g) {
    for (int t = 0; t < cells.periods(); ++t) {
      if (cells.treatment(g, t) != 1) continue;
      const double share = static_cast<double>(cells.count(g, t)) / n1;
      normalizer += share * numerators[k];
      scale += share * std::abs(numerators[k]);
      table.entries.push_back({g, t, share, numerators[k]});
      ++k;
    }
  }
  const double norm = normalizer.value();
  if (!(std::abs(norm) > kNormalizerTolerance * scale.value()))
    throw Error(ErrorCode::DegenerateNormalizer,
                "average residual over treated cells is zero; weights undefined");
  for (auto& e : table.entries) e.weight /= norm;
  summarize(table);
  return table;
}

}  // namespace

void summarize(WeightTable& table) {
  WeightSummary s;
  CompensatedSum pos, neg, dispersion;
  for (const auto& e : table.entries) {
    if (std::abs(e.weight) < kZeroWeightTolerance) {
      ++s.n_zero;
    } else if (e.weight > 0) {
      ++s.n_positive;
      pos += e.contribution();
    } else {
      ++s.n_negative;
      neg += e.contribution();
    }
    dispersion += e.share * (e.weight - 1.0) * (e.weight - 1.0);
  }
  s.sum_positive = pos.value();
  s.sum_negative = neg.value();
  s.sigma_w = std::sqrt(std::max(0.0, dispersion.value()));
  table.summary = s;
}

WeightTable fe_weights(const CellTable& cells, const FeResiduals& residuals) {
  std::vector<double> numerators;
  for (int g = 0; g < cells.groups(); ++g)
    for (int t = 0; t < cells.periods(); ++t)
      if (cells.treatment(g, t) == 1) numerators.push_back(residuals.at(g, t));
  return normalize(cells, EstimatorKind::Fe, numerators);
}

WeightTable fe_weights(const CellTable& cells) {
  return fe_weights(cells, residualize_fe(cells));
}

WeightTable fd_weights(const CellTable& cells, const FdResiduals& residuals) {
  const int T = cells.periods();
  std::vector<double> numerators;
  for (int g = 0; g < cells.groups(); ++g) {
    for (int t = 0; t < T; ++t) {
      if (cells.treatment(g, t) != 1) continue;
      double next = 0.0;
      if (t + 1 < T)
        next = static_cast<double>(cells.count(g, t + 1)) / static_cast<double>(cells.count(g, t)) *
               residuals.at(g, t + 1);
      numerators.push_back(residuals.at(g, t) - next);
    }
  }
  return normalize(cells, EstimatorKind::Fd, numerators);
}

WeightTable fd_weights(const CellTable& cells) {
  return fd_weights(cells, residualize_fd(cells));
}

std::vector<MonotonicityViolation> check_weight_monotonicity(const CellTable& cells,
                                                            const WeightTable& weights) {
  if (!validate_design(cells).constant_growth)
    throw Error(ErrorCode::PreconditionNotMet,
                "cell-size growth rates differ across groups; monotonicity not implied");

  std::vector<MonotonicityViolation> out;
  const auto& es = weights.entries;
  for (std::size_t a = 0; a < es.size(); ++a) {
    for (std::size_t b = 0; b < es.size(); ++b) {
      if (a == b) continue;
      const auto& x = es[a];
      const auto& y = es[b];
      if (x.group == y.group &&
          cells.period_treatment_mean(x.period) >
              cells.period_treatment_mean(y.period) + kShareTieTolerance &&
          !(x.weight < y.weight)) {
        out.push_back({MonotonicityViolation::Kind::AcrossPeriods, x.group, x.group, x.period, y.period});
      }
      if (x.period == y.period &&
          cells.group_treatment_mean(x.group) >
              cells.group_treatment_mean(y.group) + kShareTieTolerance &&
          !(x.weight < y.weight)) {
        out.push_back({MonotonicityViolation::Kind::AcrossGroups, x.group, y.group, x.period, x.period});
      }
    }
  }
  return out;
}

bool fd_weight_predicted_negative(const CellTable& cells, int g, int t) {
  if (t == 0 || cells.treatment(g, t - 1) != 1) return false;
  const int T = cells.periods();
  const double here = cells.period_treatment_mean(t);
  const double before = cells.period_treatment_mean(t - 1);
  const double after = t + 1 < T ? cells.period_treatment_mean(t + 1) : here;
  return (here - before) > (after - here) + kShareTieTolerance;
}

std::vector<SignViolation> check_fd_sign_pattern(const CellTable& cells, const WeightTable& fd) {
  const DesignReport design = validate_design(cells);
  if (!design.is_staggered || !design.time_invariant_counts)
    throw Error(ErrorCode::PreconditionNotMet,
                "sign characterization needs a staggered design with time-invariant cell sizes");
  if (fd.kind != EstimatorKind::Fd)
    throw Error(ErrorCode::InvalidArgument, "sign characterization applies to first-difference weights");

  std::vector<SignViolation> out;
  for (const auto& e : fd.entries) {
    const bool predicted = fd_weight_predicted_negative(cells, e.group, e.period);
    const bool negative = e.weight < -kNegativeWeightTolerance;
    if (predicted != negative) out.push_back({e.group, e.period, predicted, e.weight});
  }
  return out;
}

WeightCorrelation correlate_weights(const WeightTable& weights, std::span<const double> covariate) {
  const auto& es = weights.entries;
  if (covariate.size() != es.size())
    throw Error(ErrorCode::InvalidArgument, "covariate has " + std::to_string(covariate.size()) +
                                                " values for " + std::to_string(es.size()) + " cells");
  if (es.size() < 3)
    throw Error(ErrorCode::InvalidArgument, "correlation needs at least three treated cells");

  const auto [cmin, cmax] = std::minmax_element(covariate.begin(), covariate.end());
  if (*cmin == *cmax) throw Error(ErrorCode::ConstantCovariate, "covariate is constant");
  const auto [wmin, wmax] = std::minmax_element(
      es.begin(), es.end(), [](const auto& a, const auto& b) { return a.weight < b.weight; });
  if (wmax->weight - wmin->weight <= kZeroWeightTolerance)
    throw Error(ErrorCode::ZeroDispersion, "weights are constant");

  CompensatedSum total, mw, mc;
  for (std::size_t i = 0; i < es.size(); ++i) {
    total += es[i].share;
    mw += es[i].share * es[i].weight;
    mc += es[i].share * covariate[i];
  }
  const double mean_w = mw.value() / total.value();
  const double mean_c = mc.value() / total.value();
  CompensatedSum cov, vw, vc;
  for (std::size_t i = 0; i < es.size(); ++i) {
    const double dw = es[i].weight - mean_w;
    const double dc = covariate[i] - mean_c;
    cov += es[i].share * dw * dc;
    vw += es[i].share * dw * dw;
    vc += es[i].share * dc * dc;
  }
  double r = cov.value() / std::sqrt(vw.value() * vc.value());
  r = std::clamp(r, -1.0, 1.0);

  WeightCorrelation out;
  out.correlation = r;
  out.n = static_cast<int>(es.size());
  const double denom = 1.0 - r * r;
  out.t_stat = denom > 0.0 ? r * std::sqrt((out.n - 2) / denom)
                           : std::copysign(std::numeric_limits<double>::infinity(), r);
  return out;
}

}  // namespace twfe
