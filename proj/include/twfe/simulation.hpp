#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "twfe/estimators.hpp"
#include "twfe/panel.hpp"

namespace twfe {

enum class Adoption { Staggered, General, MoreEarlyAdopters, MoreLateAdopters, Explicit };
enum class EffectProfile { Constant, GroupVarying, TimeVarying, Additive, DynamicBuildup, Random };

/// Data-generating process. Outcomes are
///   Y = gamma_g + lambda_t + D_{g,t} * Delta_{g,t} + shock_{g,t} + noise
/// at the unit level, so untreated outcomes share trends across groups by
/// construction.
struct DgpConfig {
  int groups = 20;
  int periods = 4;
  Adoption adoption = Adoption::Staggered;
  /// Explicit treatment paths, e.g. "000x1;001x10;011x10" (pattern x copies).
  /// Sets adoption to Explicit and overrides groups/periods.
  std::string design;
  double never_treated_share = 0.2;  // staggered variants
  double switch_probability = 0.3;   // general designs

  EffectProfile effect_profile = EffectProfile::Constant;
  double effect = 1.0;
  double effect_spread = 0.0;  // sd of the group component / random draws
  double effect_growth = 0.0;  // slope in calendar time or exposure

  std::vector<double> group_effects;  // empty: drawn N(0, group_effect_sd)
  double group_effect_sd = 1.0;
  std::vector<double> time_trends;    // empty: time_trend_slope * (t-1)
  double time_trend_slope = 0.5;

  double noise_sd = 1.0;
  /// One value for every cell, one per group, or one per cell (row-major).
  std::vector<std::int64_t> units_per_cell{1};
  /// AR(1) group-by-period shock, off by default.
  double group_shock_sd = 0.0;
  double serial_correlation = 0.0;

  bool fixed_design = true;
  std::uint64_t seed = 1;
  int replications = 1000;
  std::vector<EstimatorId> estimators{{EstimatorId::Kind::Fe, 0}, {EstimatorId::Kind::Fd, 0},
                                      {EstimatorId::Kind::Didm, 0}};
};

/// key = value lines, '#' comments. Unknown keys and bad values throw
/// InvalidConfig. The result is validated.
DgpConfig parse_dgp_config(std::istream& in);
DgpConfig parse_dgp_config_string(const std::string& text);
DgpConfig load_dgp_config(const std::string& path);
/// Throws InvalidConfig.
void validate_config(const DgpConfig& config);

/// Everything held fixed across draws: treatment paths, counts, fixed
/// effects and the planted cell effects. Delta is defined on every cell; on
/// untreated cells it is the effect the cell would have if treated (with
/// exposure 1 under dynamic buildup) and never enters an outcome.
struct PlantedDesign {
  int groups = 0;
  int periods = 0;
  std::vector<int> treatments;
  std::vector<std::int64_t> counts;
  std::vector<double> gamma;
  std::vector<double> lambda;
  std::vector<double> effects;
};

PlantedDesign build_design(const DgpConfig& config, std::uint64_t seed);

struct SimulatedDraw {
  CellTable cells;
  std::vector<double> effects;  // realized Delta_{g,t}, row-major
};

/// Draw `index` as an aggregated panel. Matches aggregate_cells applied to
/// generate_panel for the same index up to summation rounding.
SimulatedDraw simulate_cells(const DgpConfig& config, std::uint64_t index);
SimulatedDraw simulate_cells(const DgpConfig& config, const PlantedDesign& design,
                             std::uint64_t index);

/// Unit-level observations for draw `index`. Throws InvalidConfig.
std::vector<Observation> generate_panel(const DgpConfig& config, std::uint64_t index = 0);

/// Sum over treated cells of (N/N1) * Delta.
double treated_effect_target(const CellTable& cells, std::span<const double> effects);
/// Count-weighted mean of Delta over switching cells (t >= 2, D differs
/// from t-1). NaN when nothing switches.
double switcher_effect_target(const CellTable& cells, std::span<const double> effects);
/// fe and fd target the treated average, DID_M and its joiners/leavers parts
/// the switcher average, placebos zero.
double planted_target(const EstimatorId& id, const CellTable& cells,
                      std::span<const double> effects);

struct MonteCarloSummary {
  EstimatorId id;
  int replications = 0;
  int draws_used = 0;
  int draws_failed = 0;  // estimator undefined on the draw
  double mean_estimate = 0.0;
  double mean_target = 0.0;
  double bias = 0.0;     // mean of estimate - target
  double mc_se = 0.0;    // sd(estimate - target) / sqrt(draws_used)
  double variance = 0.0; // sample variance of the estimate
};

struct MonteCarloReport {
  std::vector<MonteCarloSummary> summaries;
  int replications = 0;
  std::uint64_t seed = 0;
  /// Extremes of the planted effects over treated cells, across all draws.
  double min_treated_effect = 0.0;
  double max_treated_effect = 0.0;

  const MonteCarloSummary* find(const EstimatorId& id) const;
};

/// R independent draws; R < 100 throws InvalidConfig.
MonteCarloReport monte_carlo(const DgpConfig& config, std::span<const EstimatorId> estimators,
                             int replications, int threads = 1);
MonteCarloReport monte_carlo(const DgpConfig& config, int threads = 1);

std::string to_string(Adoption adoption);
std::string to_string(EffectProfile profile);

}  // namespace twfe
