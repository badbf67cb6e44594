#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "twfe/panel.hpp"

namespace fixture {

// One treatment path per group ("011" = untreated, then treated twice).
// Outcomes default to zero and counts to one.
inline twfe::CellTable from_paths(const std::vector<std::string>& paths, std::vector<double> outcomes = {},
                                  std::vector<std::int64_t> counts = {}) {
  const int G = static_cast<int>(paths.size());
  const int T = static_cast<int>(paths.front().size());
  std::vector<std::string> groups, periods;
  for (int g = 0; g < G; ++g) groups.push_back(std::to_string(g + 1));
  for (int t = 0; t < T; ++t) periods.push_back(std::to_string(t + 1));
  std::vector<int> d;
  for (const auto& p : paths)
    for (char c : p) d.push_back(c - '0');
  if (outcomes.empty()) outcomes.assign(d.size(), 0.0);
  if (counts.empty()) counts.assign(d.size(), 1);
  return twfe::CellTable(groups, periods, counts, outcomes, d);
}

// Two groups over three periods: group 1 treated in period 3 only, group 2
// in periods 2 and 3. Untreated outcome = t, effects (1, 1, 4) on the
// treated cells in table order, so Y = (1,2,4 ; 1,3,7).
inline twfe::CellTable two_by_three() {
  return from_paths({"001", "011"}, {1, 2, 4, 1, 3, 7});
}

inline const std::vector<double> kTwoByThreeEffects{0, 0, 1, 0, 1, 4};

// Never treated, treated last period, treated last two periods.
inline twfe::CellTable three_groups(std::vector<double> outcomes = {}) {
  return from_paths({"000", "001", "011"}, std::move(outcomes));
}

struct RandomPanelOptions {
  int min_groups = 2;
  int max_groups = 10;
  int min_periods = 2;
  int max_periods = 10;
  int max_count = 5;  // counts drawn from 1..max_count; 1 keeps them equal
  bool staggered = false;
  bool time_invariant_counts = false;
};

// Random sharp panel with normal outcomes. May be collinear; callers that
// need a regression check try_beta_* first.
inline twfe::CellTable random_panel(std::mt19937_64& rng, const RandomPanelOptions& o = {}) {
  std::uniform_int_distribution<int> Gd(o.min_groups, o.max_groups), Td(o.min_periods, o.max_periods);
  std::uniform_int_distribution<std::int64_t> Nd(1, o.max_count);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> z(0.0, 1.0);
  const int G = Gd(rng), T = Td(rng);
  std::vector<std::string> groups, periods;
  for (int g = 0; g < G; ++g) groups.push_back(std::to_string(g + 1));
  for (int t = 0; t < T; ++t) periods.push_back(std::to_string(t + 1));
  std::vector<int> d(static_cast<std::size_t>(G) * T);
  std::vector<std::int64_t> n(d.size());
  std::vector<double> y(d.size());
  std::uniform_int_distribution<int> adopt(0, T);  // T = never
  for (int g = 0; g < G; ++g) {
    const int a = adopt(rng);
    const std::int64_t group_n = Nd(rng);
    for (int t = 0; t < T; ++t) {
      const std::size_t i = static_cast<std::size_t>(g) * T + t;
      d[i] = o.staggered ? (t >= a ? 1 : 0) : (coin(rng) ? 1 : 0);
      n[i] = o.time_invariant_counts ? group_n : Nd(rng);
      y[i] = z(rng);
    }
  }
  return twfe::CellTable(groups, periods, n, y, d);
}

}  // namespace fixture
