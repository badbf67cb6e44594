#include "twfe/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "twfe/error.hpp"
#include "twfe/summation.hpp"

namespace twfe {
namespace {

constexpr double kDispersionTolerance = 1e-12;

double checked_sigma_w(const WeightTable& weights) {
  const double s = weights.summary.sigma_w;
  if (!(s > kDispersionTolerance))
    throw Error(ErrorCode::ZeroDispersion, "weights have zero dispersion; bound undefined");
  return s;
}

}  // namespace

double sigma_lower(double beta, const WeightTable& weights) {
  return std::abs(beta) / checked_sigma_w(weights);
}

std::vector<double> sigma_lower_profile(double beta, const WeightTable& weights) {
  const double s = checked_sigma_w(weights);
  std::vector<double> profile;
  profile.reserve(weights.entries.size());
  for (const auto& e : weights.entries) profile.push_back(beta * (e.weight - 1.0) / (s * s));
  return profile;
}

OppositeSignBound sigma_lower_lower(double beta, const WeightTable& weights) {
  if (beta == 0.0) throw Error(ErrorCode::ZeroBeta, "coefficient is zero; sign reversal bound undefined");
  const auto& es = weights.entries;
  if (std::none_of(es.begin(), es.end(),
                   [](const WeightEntry& e) { return e.weight < -kZeroWeightTolerance; }))
    throw Error(ErrorCode::NoNegativeWeight,
                "no strictly negative weight; the coefficient cannot oppose every cell effect");

  const std::size_t n = es.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (es[a].weight != es[b].weight) return es[a].weight > es[b].weight;
    if (es[a].group != es[b].group) return es[a].group < es[b].group;
    return es[a].period < es[b].period;
  });

  // Suffix sums over the descending order, index k = rank - 1.
  std::vector<double> P(n), S(n), Tsum(n);
  CompensatedSum p_acc, s_acc, t_acc;
  for (std::size_t k = n; k-- > 0;) {
    const auto& e = es[order[k]];
    p_acc += e.share;
    s_acc += e.share * e.weight;
    t_acc += e.share * e.weight * e.weight;
    P[k] = p_acc.value();
    S[k] = s_acc.value();
    Tsum[k] = t_acc.value();
  }

  OppositeSignBound out;
  out.profile.assign(n, 0.0);

  // Weights averaging to a non-positive value admit a constant profile.
  if (S[0] < 0.0) {
    out.value = 0.0;
    out.s_index = 1;
    std::fill(out.profile.begin(), out.profile.end(), beta / S[0]);
    return out;
  }

  std::size_t s = n;
  for (std::size_t k = 1; k < n; ++k) {
    const double rest = 1.0 - P[k];
    if (rest <= 0.0) continue;
    if (es[order[k]].weight < -S[k] / rest) {
      s = k;
      break;
    }
  }
  if (s == n)
    throw Error(ErrorCode::NoNegativeWeight, "no rank satisfies the active-set threshold");

  const double rest = 1.0 - P[s];
  const double quad = Tsum[s] + S[s] * S[s] / rest;
  const double lambda = beta / quad;
  out.value = std::abs(beta) / std::sqrt(quad);
  out.s_index = static_cast<int>(s) + 1;
  for (std::size_t k = s; k < n; ++k)
    out.profile[order[k]] = lambda * (S[s] / rest + es[order[k]].weight);
  return out;
}

RobustnessBounds robustness_bounds(double beta, const WeightTable& weights) {
  RobustnessBounds out;
  out.beta = beta;
  out.sigma_w = weights.summary.sigma_w;
  try {
    out.sigma_lower = sigma_lower(beta, weights);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ZeroDispersion) throw;
  }
  try {
    auto bound = sigma_lower_lower(beta, weights);
    out.sigma_lower_lower = bound.value;
    out.s_index = bound.s_index;
    out.minimizing_profile = std::move(bound.profile);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoNegativeWeight && e.code() != ErrorCode::ZeroBeta) throw;
  }
  return out;
}

}  // namespace twfe
