#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "twfe/panel.hpp"

namespace twfe {

/// Count-weighted transition tallies. Vectors are indexed by period; entry t
/// describes the move from t-1 to t (entry 0 is zero).
struct SwitcherCounts {
  std::vector<std::int64_t> joiners;           // N_{1,0,t}
  std::vector<std::int64_t> leavers;           // N_{0,1,t}
  std::vector<std::int64_t> stable_untreated;  // N_{0,0,t}
  std::vector<std::int64_t> stable_treated;    // N_{1,1,t}
  std::int64_t n_switchers = 0;                // N_S

  /// Three-period histories N_{d,d',d'',t} (treatment d at t, d' at t-1,
  /// d'' at t-2); zero for t < 2.
  std::vector<std::array<std::int64_t, 8>> histories;
  std::int64_t n_placebo_switchers = 0;  // N_S^pl

  std::int64_t history(int t, int d, int d_prev, int d_prev2) const {
    return histories[t][static_cast<std::size_t>(d * 4 + d_prev * 2 + d_prev2)];
  }
};

SwitcherCounts switcher_counts(const CellTable& cells);

struct PeriodComponent {
  int period = 0;  // CellTable period index of the switch period t
  double did_plus = 0.0;
  double did_minus = 0.0;
  std::int64_t n_joiners = 0;
  std::int64_t n_leavers = 0;
  std::int64_t n_stable_untreated = 0;
  std::int64_t n_stable_treated = 0;
  bool plus_defined = false;
  bool minus_defined = false;
};

struct StableGroupWarning {
  enum class Direction { Joiners, Leavers };
  int period = 0;
  Direction direction = Direction::Joiners;
  std::string message;
};

struct DidmResult {
  double estimate = 0.0;
  std::vector<PeriodComponent> per_period;
  std::optional<double> joiners_estimate;
  std::optional<double> leavers_estimate;
  std::int64_t n_switchers = 0;
  std::vector<StableGroupWarning> stable_group_warnings;
};

struct PlaceboResult {
  int horizon = 1;
  double estimate = 0.0;
  std::vector<PeriodComponent> per_period;
  std::optional<double> joiners_estimate;
  std::optional<double> leavers_estimate;
  std::int64_t n_switchers = 0;  // N_S^pl at this horizon
  std::vector<StableGroupWarning> stable_group_warnings;
  /// (group, period) pairs whose treatment was stable over the placebo window.
  std::vector<std::pair<int, int>> subsample_cells;
};

/// A CellTable together with the (g,t) pairs allowed to enter the period-t
/// comparisons. Produced by placebo_subsample for re-estimation.
struct Subsample {
  CellTable cells;
  int horizon = 0;
  std::vector<std::uint8_t> keep;  // row-major like CellTable

  bool kept(int g, int t) const { return keep[cells.index(g, t)] != 0; }
  std::vector<std::pair<int, int>> kept_cells() const;
};

/// Weighted average of the joiner and leaver DIDs across switch periods.
/// Components without their stable control are set to 0 and flagged
/// undefined; each such period also produces a warning. Throws NoSwitchers.
DidmResult did_m(const CellTable& cells);

/// did_m restricted to the pairs kept by the subsample.
DidmResult did_m(const Subsample& sample);

/// Placebo at horizon k >= 1: switchers at t whose treatment was stable over
/// t-k-1..t-1, compared with same-status groups stable over t-k-1..t, on the
/// outcome change from t-k-1 to t-k. Horizon 1 is the one-period-before-switch
/// placebo. Throws HorizonTooLarge (T < k + 2), NoPlaceboSwitchers.
PlaceboResult did_m_placebo(const CellTable& cells, int horizon);

/// The pairs used by the horizon-k placebo: for t >= k+2, groups whose
/// treatment did not change over t-k-1..t-1. Throws like did_m_placebo.
Subsample placebo_subsample(const CellTable& cells, int horizon);

}  // namespace twfe
