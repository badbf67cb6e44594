#include "twfe/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>

#include "twfe/error.hpp"
#include "twfe/summation.hpp"

namespace twfe {
namespace {

constexpr double kTreatmentSnap = 1e-9;

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

int snap_treatment(double d, const Observation& obs) {
  if (std::abs(d) <= kTreatmentSnap) return 0;
  if (std::abs(d - 1.0) <= kTreatmentSnap) return 1;
  throw Error(ErrorCode::InvalidTreatment,
              "treatment " + std::to_string(d) + " in group " + obs.group +
                  ", period " + obs.time + " is not binary");
}

}  // namespace

std::vector<std::string> sorted_labels(std::vector<std::string> labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  std::vector<double> values(labels.size());
  bool numeric = true;
  for (std::size_t i = 0; i < labels.size() && numeric; ++i)
    numeric = parse_number(labels[i], values[i]);
  if (!numeric) return labels;

  std::vector<std::size_t> order(labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (std::size_t i : order) out.push_back(labels[i]);
  return out;
}

CellTable::CellTable(std::vector<std::string> group_labels,
                     std::vector<std::string> period_labels,
                     std::vector<std::int64_t> counts, std::vector<double> outcomes,
                     std::vector<int> treatments)
    : group_labels_(std::move(group_labels)),
      period_labels_(std::move(period_labels)),
      counts_(std::move(counts)),
      outcomes_(std::move(outcomes)),
      treatments_(std::move(treatments)) {
  const std::size_t n = group_labels_.size() * period_labels_.size();
  if (n == 0) throw Error(ErrorCode::EmptyInput, "cell table has no cells");
  if (counts_.size() != n || outcomes_.size() != n || treatments_.size() != n)
    throw Error(ErrorCode::InvalidArgument, "cell vectors do not match G x T");
  for (int g = 0; g < groups(); ++g) {
    for (int t = 0; t < periods(); ++t) {
      if (count(g, t) <= 0)
        throw Error(ErrorCode::MissingCell, "cell (" + group_labels_[g] + ", " +
                                                period_labels_[t] + ") is empty");
      if (treatment(g, t) != 0 && treatment(g, t) != 1)
        throw Error(ErrorCode::InvalidTreatment,
                    "cell (" + group_labels_[g] + ", " + period_labels_[t] +
                        ") has a non-binary treatment");
    }
  }
  compute_marginals();
}

void CellTable::compute_marginals() {
  const int G = groups();
  const int T = periods();
  group_d_.assign(G, 0.0);
  period_d_.assign(T, 0.0);
  group_n_.assign(G, 0);
  period_n_.assign(T, 0);
  total_n_ = 0;
  treated_n_ = 0;

  std::vector<std::int64_t> group_treated(G, 0), period_treated(T, 0);
  for (int g = 0; g < G; ++g) {
    for (int t = 0; t < T; ++t) {
      const std::int64_t n = count(g, t);
      group_n_[g] += n;
      period_n_[t] += n;
      total_n_ += n;
      if (treatment(g, t) == 1) {
        group_treated[g] += n;
        period_treated[t] += n;
        treated_n_ += n;
      }
    }
  }
  // Binary treatments make every marginal a ratio of exact integer counts.
  for (int g = 0; g < G; ++g)
    group_d_[g] = static_cast<double>(group_treated[g]) / static_cast<double>(group_n_[g]);
  for (int t = 0; t < T; ++t)
    period_d_[t] = static_cast<double>(period_treated[t]) / static_cast<double>(period_n_[t]);
  overall_d_ = static_cast<double>(treated_n_) / static_cast<double>(total_n_);
}

CellTable CellTable::select_groups(std::span<const int> draw) const {
  const int T = periods();
  std::vector<std::string> labels;
  std::vector<std::int64_t> counts;
  std::vector<double> outcomes;
  std::vector<int> treatments;
  labels.reserve(draw.size());
  counts.reserve(draw.size() * T);
  outcomes.reserve(draw.size() * T);
  treatments.reserve(draw.size() * T);

  std::vector<int> times_drawn(groups(), 0);
  for (int g : draw) {
    if (g < 0 || g >= groups())
      throw Error(ErrorCode::InvalidArgument, "group index out of range");
    const int k = times_drawn[g]++;
    labels.push_back(k == 0 ? group_labels_[g] : group_labels_[g] + "#" + std::to_string(k));
    for (int t = 0; t < T; ++t) {
      counts.push_back(count(g, t));
      outcomes.push_back(outcome(g, t));
      treatments.push_back(treatment(g, t));
    }
  }
  return CellTable(std::move(labels), period_labels_, std::move(counts),
                   std::move(outcomes), std::move(treatments));
}

CellTable CellTable::with_outcomes(std::vector<double> outcomes) const {
  return CellTable(group_labels_, period_labels_, counts_, std::move(outcomes), treatments_);
}

CellTable aggregate_cells(std::span<const Observation> observations) {
  if (observations.empty()) throw Error(ErrorCode::EmptyInput, "no observations");

  std::vector<std::string> groups, periods;
  groups.reserve(observations.size());
  periods.reserve(observations.size());
  for (const auto& obs : observations) {
    groups.push_back(obs.group);
    periods.push_back(obs.time);
  }
  groups = sorted_labels(std::move(groups));
  periods = sorted_labels(std::move(periods));

  std::unordered_map<std::string, int> group_index, period_index;
  for (std::size_t i = 0; i < groups.size(); ++i) group_index.emplace(groups[i], static_cast<int>(i));
  for (std::size_t i = 0; i < periods.size(); ++i) period_index.emplace(periods[i], static_cast<int>(i));

  const std::size_t G = groups.size();
  const std::size_t T = periods.size();
  std::vector<std::int64_t> counts(G * T, 0);
  std::vector<CompensatedSum> sums(G * T);
  std::vector<int> treatments(G * T, -1);
  std::set<std::tuple<std::string, int, int>> seen_units;

  for (const auto& obs : observations) {
    if (obs.count <= 0)
      throw Error(ErrorCode::InvalidArgument, "row for group " + obs.group +
                                                  ", period " + obs.time +
                                                  " has a non-positive count");
    const int g = group_index.at(obs.group);
    const int t = period_index.at(obs.time);
    const std::size_t idx = static_cast<std::size_t>(g) * T + static_cast<std::size_t>(t);
    const int d = snap_treatment(obs.treatment, obs);
    if (treatments[idx] == -1) {
      treatments[idx] = d;
    } else if (treatments[idx] != d) {
      throw Error(ErrorCode::MixedTreatmentInCell,
                  "cell (" + obs.group + ", " + obs.time + ") mixes treated and untreated units");
    }
    if (!obs.unit.empty() && !seen_units.emplace(obs.unit, g, t).second)
      throw Error(ErrorCode::DuplicateObservation,
                  "unit " + obs.unit + " appears twice in cell (" + obs.group + ", " +
                      obs.time + ")");
    counts[idx] += obs.count;
    sums[idx] += static_cast<double>(obs.count) * obs.outcome;
  }

  std::vector<double> means(G * T, 0.0);
  for (std::size_t g = 0; g < G; ++g) {
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t idx = g * T + t;
      if (counts[idx] == 0)
        throw Error(ErrorCode::MissingCell,
                    "group " + groups[g] + " has no observation in period " + periods[t]);
      means[idx] = sums[idx].value() / static_cast<double>(counts[idx]);
    }
  }
  return CellTable(std::move(groups), std::move(periods), std::move(counts),
                   std::move(means), std::move(treatments));
}

bool DesignReport::all_stable_groups_ok() const {
  return std::all_of(stable_groups_ok.begin(), stable_groups_ok.end(), [](bool b) { return b; });
}

bool DesignReport::all_stable_groups_placebo_ok() const {
  return std::all_of(stable_groups_placebo_ok.begin(), stable_groups_placebo_ok.end(),
                     [](bool b) { return b; });
}

DesignReport validate_design(const CellTable& cells) {
  const int G = cells.groups();
  const int T = cells.periods();
  DesignReport report;

  // A constructed CellTable is complete and binary; re-check anyway so the
  // report is computed from the data rather than assumed.
  for (int g = 0; g < G; ++g) {
    for (int t = 0; t < T; ++t) {
      if (cells.count(g, t) <= 0)
        throw Error(ErrorCode::MissingCell, "cell (" + cells.group_labels()[g] + ", " +
                                                cells.period_labels()[t] + ") is empty");
      const int d = cells.treatment(g, t);
      if (d != 0 && d != 1) report.is_sharp = false;
      if (t > 0 && d < cells.treatment(g, t - 1)) report.is_staggered = false;
      if (t > 0 && cells.count(g, t) != cells.count(g, t - 1)) report.time_invariant_counts = false;
    }
  }

  // Growth N_{g,t}/N_{g,t-1} compared against group 0 by cross-multiplication.
  for (int t = 1; t < T && report.constant_growth; ++t) {
    for (int g = 1; g < G; ++g) {
      const auto lhs = static_cast<long double>(cells.count(g, t)) * cells.count(0, t - 1);
      const auto rhs = static_cast<long double>(cells.count(0, t)) * cells.count(g, t - 1);
      if (lhs != rhs) {
        report.constant_growth = false;
        break;
      }
    }
  }

  report.stable_groups_ok.assign(T, true);
  report.stable_groups_placebo_ok.assign(T, true);
  for (int t = 1; t < T; ++t) {
    bool joiner = false, leaver = false, stay0 = false, stay1 = false;
    bool pl_joiner = false, pl_leaver = false, pl_stay0 = false, pl_stay1 = false;
    for (int g = 0; g < G; ++g) {
      const int now = cells.treatment(g, t);
      const int prev = cells.treatment(g, t - 1);
      joiner |= (prev == 0 && now == 1);
      leaver |= (prev == 1 && now == 0);
      stay0 |= (prev == 0 && now == 0);
      stay1 |= (prev == 1 && now == 1);
      if (t >= 2 && cells.treatment(g, t - 2) == prev) {
        pl_joiner |= (prev == 0 && now == 1);
        pl_leaver |= (prev == 1 && now == 0);
        pl_stay0 |= (prev == 0 && now == 0);
        pl_stay1 |= (prev == 1 && now == 1);
      }
    }
    report.stable_groups_ok[t] = (!joiner || stay0) && (!leaver || stay1);
    if (t >= 2)
      report.stable_groups_placebo_ok[t] = (!pl_joiner || pl_stay0) && (!pl_leaver || pl_stay1);
  }
  return report;
}

}  // namespace twfe
