#include "twfe/didm.hpp"

#include "twfe/error.hpp"
#include "twfe/summation.hpp"

namespace twfe {
namespace {

// One pass of the switch-period DIDs.
//  span:   treatment must equal D_{t-1} over t-span..t-1
//  offset: outcome change is Y_{t-offset} - Y_{t-offset-1}
//  keep:   optional (g,t) filter
struct Pass {
  std::vector<PeriodComponent> per_period;
  std::vector<StableGroupWarning> warnings;
  std::int64_t total_joiners = 0;
  std::int64_t total_leavers = 0;
  double estimate = 0.0;
  std::optional<double> joiners;
  std::optional<double> leavers;
};

Pass run_pass(const CellTable& cells, int span, int offset, const std::vector<std::uint8_t>* keep,
              const char* what) {
  const int G = cells.groups();
  const int T = cells.periods();
  Pass pass;
  for (int t = span; t < T; ++t) {
    PeriodComponent c;
    c.period = t;
    CompensatedSum join_sum, leave_sum, stay0_sum, stay1_sum;
    for (int g = 0; g < G; ++g) {
      if (keep && !(*keep)[cells.index(g, t)]) continue;
      const int prev = cells.treatment(g, t - 1);
      bool stable = true;
      for (int s = t - span; s < t - 1 && stable; ++s) stable = cells.treatment(g, s) == prev;
      if (!stable) continue;
      const int now = cells.treatment(g, t);
      const std::int64_t n = cells.count(g, t);
      const double change = cells.outcome(g, t - offset) - cells.outcome(g, t - offset - 1);
      const double weighted = static_cast<double>(n) * change;
      if (prev == 0 && now == 1) {
        c.n_joiners += n;
        join_sum += weighted;
      } else if (prev == 1 && now == 0) {
        c.n_leavers += n;
        leave_sum += weighted;
      } else if (prev == 0) {
        c.n_stable_untreated += n;
        stay0_sum += weighted;
      } else {
        c.n_stable_treated += n;
        stay1_sum += weighted;
      }
    }
    c.plus_defined = c.n_joiners > 0 && c.n_stable_untreated > 0;
    c.minus_defined = c.n_leavers > 0 && c.n_stable_treated > 0;
    if (c.plus_defined)
      c.did_plus = join_sum.value() / static_cast<double>(c.n_joiners) -
                   stay0_sum.value() / static_cast<double>(c.n_stable_untreated);
    if (c.minus_defined)
      c.did_minus = stay1_sum.value() / static_cast<double>(c.n_stable_treated) -
                    leave_sum.value() / static_cast<double>(c.n_leavers);

    const std::string& label = cells.period_labels()[t];
    if (c.n_joiners > 0 && c.n_stable_untreated == 0)
      pass.warnings.push_back({t, StableGroupWarning::Direction::Joiners,
                               std::string(what) + ": period " + label +
                                   " has joiners but no group untreated throughout; "
                                   "joiner DID set to 0"});
    if (c.n_leavers > 0 && c.n_stable_treated == 0)
      pass.warnings.push_back({t, StableGroupWarning::Direction::Leavers,
                               std::string(what) + ": period " + label +
                                   " has leavers but no group treated throughout; "
                                   "leaver DID set to 0"});
    pass.total_joiners += c.n_joiners;
    pass.total_leavers += c.n_leavers;
    pass.per_period.push_back(c);
  }

  const std::int64_t n_s = pass.total_joiners + pass.total_leavers;
  if (n_s == 0) return pass;
  CompensatedSum est, join, leave;
  for (const auto& c : pass.per_period) {
    est += static_cast<double>(c.n_joiners) / static_cast<double>(n_s) * c.did_plus;
    est += static_cast<double>(c.n_leavers) / static_cast<double>(n_s) * c.did_minus;
    join += static_cast<double>(c.n_joiners) * c.did_plus;
    leave += static_cast<double>(c.n_leavers) * c.did_minus;
  }
  pass.estimate = est.value();
  if (pass.total_joiners > 0) pass.joiners = join.value() / static_cast<double>(pass.total_joiners);
  if (pass.total_leavers > 0) pass.leavers = leave.value() / static_cast<double>(pass.total_leavers);
  return pass;
}

void check_horizon(const CellTable& cells, int horizon) {
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "placebo horizon must be at least 1");
  if (cells.periods() < horizon + 2)
    throw Error(ErrorCode::HorizonTooLarge, "placebo horizon " + std::to_string(horizon) +
                                                " needs at least " + std::to_string(horizon + 2) +
                                                " periods");
}

DidmResult to_result(Pass pass) {
  DidmResult r;
  r.estimate = pass.estimate;
  r.per_period = std::move(pass.per_period);
  r.joiners_estimate = pass.joiners;
  r.leavers_estimate = pass.leavers;
  r.n_switchers = pass.total_joiners + pass.total_leavers;
  r.stable_group_warnings = std::move(pass.warnings);
  return r;
}

}  // namespace

SwitcherCounts switcher_counts(const CellTable& cells) {
  const int G = cells.groups();
  const int T = cells.periods();
  SwitcherCounts c;
  c.joiners.assign(T, 0);
  c.leavers.assign(T, 0);
  c.stable_untreated.assign(T, 0);
  c.stable_treated.assign(T, 0);
  c.histories.assign(T, {});
  for (int t = 1; t < T; ++t) {
    for (int g = 0; g < G; ++g) {
      const int now = cells.treatment(g, t);
      const int prev = cells.treatment(g, t - 1);
      const std::int64_t n = cells.count(g, t);
      if (prev == 0 && now == 1) c.joiners[t] += n;
      else if (prev == 1 && now == 0) c.leavers[t] += n;
      else if (prev == 0) c.stable_untreated[t] += n;
      else c.stable_treated[t] += n;
      if (t >= 2) {
        const int prev2 = cells.treatment(g, t - 2);
        c.histories[t][static_cast<std::size_t>(now * 4 + prev * 2 + prev2)] += n;
        if (now != prev && prev == prev2) c.n_placebo_switchers += n;
      }
    }
    c.n_switchers += c.joiners[t] + c.leavers[t];
  }
  return c;
}

DidmResult did_m(const CellTable& cells) {
  if (cells.periods() < 2) throw Error(ErrorCode::NoSwitchers, "a single period has no switches");
  Pass pass = run_pass(cells, 1, 0, nullptr, "DID_M");
  if (pass.total_joiners + pass.total_leavers == 0)
    throw Error(ErrorCode::NoSwitchers, "no group changes treatment between consecutive periods");
  return to_result(std::move(pass));
}

DidmResult did_m(const Subsample& sample) {
  if (sample.cells.periods() < 2)
    throw Error(ErrorCode::NoSwitchers, "a single period has no switches");
  Pass pass = run_pass(sample.cells, 1, 0, &sample.keep, "DID_M (placebo subsample)");
  if (pass.total_joiners + pass.total_leavers == 0)
    throw Error(ErrorCode::NoSwitchers, "no switcher in the subsample");
  return to_result(std::move(pass));
}

PlaceboResult did_m_placebo(const CellTable& cells, int horizon) {
  check_horizon(cells, horizon);
  Pass pass = run_pass(cells, horizon + 1, horizon, nullptr,
                       ("placebo horizon " + std::to_string(horizon)).c_str());
  if (pass.total_joiners + pass.total_leavers == 0)
    throw Error(ErrorCode::NoPlaceboSwitchers,
                "no switcher with a stable treatment history at horizon " + std::to_string(horizon));
  PlaceboResult r;
  r.horizon = horizon;
  r.estimate = pass.estimate;
  r.per_period = std::move(pass.per_period);
  r.joiners_estimate = pass.joiners;
  r.leavers_estimate = pass.leavers;
  r.n_switchers = pass.total_joiners + pass.total_leavers;
  r.stable_group_warnings = std::move(pass.warnings);
  r.subsample_cells = placebo_subsample(cells, horizon).kept_cells();
  return r;
}

Subsample placebo_subsample(const CellTable& cells, int horizon) {
  check_horizon(cells, horizon);
  Subsample sample{cells, horizon, std::vector<std::uint8_t>(cells.size(), 0)};
  bool any_switcher = false;
  for (int g = 0; g < cells.groups(); ++g) {
    for (int t = horizon + 1; t < cells.periods(); ++t) {
      const int prev = cells.treatment(g, t - 1);
      bool stable = true;
      for (int s = t - horizon - 1; s < t - 1 && stable; ++s) stable = cells.treatment(g, s) == prev;
      if (!stable) continue;
      sample.keep[cells.index(g, t)] = 1;
      any_switcher |= cells.treatment(g, t) != prev;
    }
  }
  if (!any_switcher)
    throw Error(ErrorCode::NoPlaceboSwitchers,
                "placebo subsample at horizon " + std::to_string(horizon) + " has no switcher");
  return sample;
}

std::vector<std::pair<int, int>> Subsample::kept_cells() const {
  std::vector<std::pair<int, int>> out;
  for (int g = 0; g < cells.groups(); ++g)
    for (int t = 0; t < cells.periods(); ++t)
      if (kept(g, t)) out.emplace_back(g, t);
  return out;
}

}  // namespace twfe
