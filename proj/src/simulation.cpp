#include "twfe/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "twfe/bootstrap.hpp"
#include "twfe/error.hpp"
#include "twfe/seed.hpp"
#include "twfe/summation.hpp"

namespace twfe {
namespace {

[[noreturn]] void bad_config(const std::string& message) {
  throw Error(ErrorCode::InvalidConfig, message);
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& value) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(x))
    bad_config(key + ": expected a number, got '" + value + "'");
  return x;
}

template <class Int>
Int to_int(const std::string& key, const std::string& value) {
  Int x = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
  if (ec != std::errc() || ptr != value.data() + value.size())
    bad_config(key + ": expected an integer, got '" + value + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_config(key + ": expected true or false, got '" + value + "'");
}

Adoption parse_adoption(const std::string& v) {
  if (v == "staggered") return Adoption::Staggered;
  if (v == "general") return Adoption::General;
  if (v == "more_early_adopters") return Adoption::MoreEarlyAdopters;
  if (v == "more_late_adopters") return Adoption::MoreLateAdopters;
  if (v == "explicit") return Adoption::Explicit;
  bad_config("adoption: unknown value '" + v + "'");
}

EffectProfile parse_profile(const std::string& v) {
  if (v == "constant") return EffectProfile::Constant;
  if (v == "group_varying") return EffectProfile::GroupVarying;
  if (v == "time_varying") return EffectProfile::TimeVarying;
  if (v == "additive") return EffectProfile::Additive;
  if (v == "dynamic_buildup") return EffectProfile::DynamicBuildup;
  if (v == "random") return EffectProfile::Random;
  bad_config("effect_profile: unknown value '" + v + "'");
}

// "000x1;001x10" -> one path per group.
std::vector<std::string> expand_design(const std::string& design) {
  std::vector<std::string> paths;
  std::istringstream in(design);
  std::string token;
  while (std::getline(in, token, ';')) {
    token = trim(token);
    if (token.empty()) continue;
    std::string pattern = token;
    int copies = 1;
    if (const auto x = token.find('x'); x != std::string::npos) {
      pattern = trim(token.substr(0, x));
      copies = to_int<int>("design", trim(token.substr(x + 1)));
    }
    if (pattern.empty() || copies < 1) bad_config("design: bad token '" + token + "'");
    for (char c : pattern)
      if (c != '0' && c != '1') bad_config("design: paths use 0 and 1 only, got '" + token + "'");
    if (!paths.empty() && paths.front().size() != pattern.size())
      bad_config("design: all paths need the same length");
    for (int i = 0; i < copies; ++i) paths.push_back(pattern);
  }
  if (paths.empty()) bad_config("design: empty");
  return paths;
}

std::int64_t units_for(const DgpConfig& c, int G, int T, int g, int t) {
  const auto& u = c.units_per_cell;
  if (u.size() == 1) return u[0];
  if (u.size() == static_cast<std::size_t>(G)) return u[g];
  if (u.size() == static_cast<std::size_t>(G) * T) return u[static_cast<std::size_t>(g) * T + t];
  bad_config("units_per_cell: expected 1, G or G*T values, got " + std::to_string(u.size()));
}

// Runs one draw; `emit(cell, unit, y)` receives each unit outcome in a fixed
// order. Returns the realized effects.
template <class Emit>
std::vector<double> run_draw(const DgpConfig& c, const PlantedDesign& d, std::uint64_t index,
                             Emit&& emit) {
  std::mt19937_64 rng(derive_seed(derive_seed(c.seed, index + 1), 1));
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> effects = d.effects;
  const double rho = c.serial_correlation;
  const double innovation = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  for (int g = 0; g < d.groups; ++g) {
    double shock = 0.0;
    for (int t = 0; t < d.periods; ++t) {
      const std::size_t i = static_cast<std::size_t>(g) * d.periods + t;
      if (c.effect_profile == EffectProfile::Random) effects[i] = c.effect + c.effect_spread * z(rng);
      if (c.group_shock_sd > 0.0) {
        const double e = z(rng);
        shock = t == 0 ? e : rho * shock + innovation * e;
      }
      const double mean = d.gamma[g] + d.lambda[t] + d.treatments[i] * effects[i] +
                          c.group_shock_sd * shock;
      for (std::int64_t u = 0; u < d.counts[i]; ++u)
        emit(i, u, c.noise_sd > 0.0 ? mean + c.noise_sd * z(rng) : mean);
    }
  }
  return effects;
}

std::vector<std::string> number_labels(int n) {
  std::vector<std::string> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) labels[i] = std::to_string(i + 1);
  return labels;
}

double direction_target(const CellTable& cells, std::span<const double> effects, int want_prev,
                        int want_now) {
  CompensatedSum num;
  std::int64_t den = 0;
  for (int g = 0; g < cells.groups(); ++g) {
    for (int t = 1; t < cells.periods(); ++t) {
      const int prev = cells.treatment(g, t - 1);
      const int now = cells.treatment(g, t);
      if (prev == now) continue;
      if (want_prev >= 0 && (prev != want_prev || now != want_now)) continue;
      const std::int64_t n = cells.count(g, t);
      num += static_cast<double>(n) * effects[cells.index(g, t)];
      den += n;
    }
  }
  return den > 0 ? num.value() / static_cast<double>(den) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string to_string(Adoption adoption) {
  switch (adoption) {
    case Adoption::Staggered: return "staggered";
    case Adoption::General: return "general";
    case Adoption::MoreEarlyAdopters: return "more_early_adopters";
    case Adoption::MoreLateAdopters: return "more_late_adopters";
    case Adoption::Explicit: return "explicit";
  }
  return "unknown";
}

std::string to_string(EffectProfile profile) {
  switch (profile) {
    case EffectProfile::Constant: return "constant";
    case EffectProfile::GroupVarying: return "group_varying";
    case EffectProfile::TimeVarying: return "time_varying";
    case EffectProfile::Additive: return "additive";
    case EffectProfile::DynamicBuildup: return "dynamic_buildup";
    case EffectProfile::Random: return "random";
  }
  return "unknown";
}

DgpConfig parse_dgp_config(std::istream& in) {
  DgpConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) bad_config("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) bad_config(key + ": missing value");

    if (key == "G" || key == "groups") c.groups = to_int<int>(key, value);
    else if (key == "T" || key == "periods") c.periods = to_int<int>(key, value);
    else if (key == "adoption") c.adoption = parse_adoption(value);
    else if (key == "design") c.design = value;
    else if (key == "never_treated_share") c.never_treated_share = to_double(key, value);
    else if (key == "switch_probability") c.switch_probability = to_double(key, value);
    else if (key == "effect_profile") c.effect_profile = parse_profile(value);
    else if (key == "effect") c.effect = to_double(key, value);
    else if (key == "effect_spread") c.effect_spread = to_double(key, value);
    else if (key == "effect_growth") c.effect_growth = to_double(key, value);
    else if (key == "group_effects") {
      c.group_effects.clear();
      for (const auto& v : split_list(value)) c.group_effects.push_back(to_double(key, v));
    } else if (key == "group_effect_sd") c.group_effect_sd = to_double(key, value);
    else if (key == "time_trends") {
      c.time_trends.clear();
      for (const auto& v : split_list(value)) c.time_trends.push_back(to_double(key, v));
    } else if (key == "time_trend_slope") c.time_trend_slope = to_double(key, value);
    else if (key == "noise_sd") c.noise_sd = to_double(key, value);
    else if (key == "units_per_cell") {
      c.units_per_cell.clear();
      for (const auto& v : split_list(value)) c.units_per_cell.push_back(to_int<std::int64_t>(key, v));
    } else if (key == "group_shock_sd") c.group_shock_sd = to_double(key, value);
    else if (key == "serial_correlation") c.serial_correlation = to_double(key, value);
    else if (key == "fixed_design") c.fixed_design = to_bool(key, value);
    else if (key == "seed") c.seed = to_int<std::uint64_t>(key, value);
    else if (key == "replications" || key == "R") c.replications = to_int<int>(key, value);
    else if (key == "estimators") {
      try {
        c.estimators = parse_estimators(value);
      } catch (const Error& e) {
        bad_config(std::string("estimators: ") + e.what());
      }
    } else bad_config("unknown key '" + key + "'");
  }
  if (!c.design.empty()) {
    const auto paths = expand_design(c.design);
    c.adoption = Adoption::Explicit;
    c.groups = static_cast<int>(paths.size());
    c.periods = static_cast<int>(paths.front().size());
  }
  validate_config(c);
  return c;
}

DgpConfig parse_dgp_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_dgp_config(in);
}

DgpConfig load_dgp_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path + "'");
  return parse_dgp_config(in);
}

void validate_config(const DgpConfig& c) {
  int G = c.groups, T = c.periods;
  if (c.adoption == Adoption::Explicit) {
    if (c.design.empty()) bad_config("adoption = explicit needs a design");
    const auto paths = expand_design(c.design);
    G = static_cast<int>(paths.size());
    T = static_cast<int>(paths.front().size());
  }
  if (G < 2) bad_config("need at least 2 groups");
  if (T < 2) bad_config("need at least 2 periods");
  if (!(c.never_treated_share >= 0.0 && c.never_treated_share <= 1.0))
    bad_config("never_treated_share must lie in [0, 1]");
  if (!(c.switch_probability >= 0.0 && c.switch_probability <= 1.0))
    bad_config("switch_probability must lie in [0, 1]");
  if (c.noise_sd < 0.0 || c.effect_spread < 0.0 || c.group_effect_sd < 0.0 || c.group_shock_sd < 0.0)
    bad_config("standard deviations must be non-negative");
  if (!(std::fabs(c.serial_correlation) < 1.0)) bad_config("serial_correlation must lie in (-1, 1)");
  if (!c.group_effects.empty() && c.group_effects.size() != static_cast<std::size_t>(G))
    bad_config("group_effects needs G values");
  if (!c.time_trends.empty() && c.time_trends.size() != static_cast<std::size_t>(T))
    bad_config("time_trends needs T values");
  if (c.units_per_cell.empty()) bad_config("units_per_cell: empty");
  for (int g = 0; g < G; ++g)
    for (int t = 0; t < T; ++t)
      if (units_for(c, G, T, g, t) < 1) bad_config("units_per_cell must be >= 1");
  if (c.replications < 1) bad_config("replications must be >= 1");
  if (c.estimators.empty()) bad_config("no estimators");
}

PlantedDesign build_design(const DgpConfig& c, std::uint64_t seed) {
  validate_config(c);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  PlantedDesign d;
  std::vector<std::string> paths;
  if (c.adoption == Adoption::Explicit) {
    paths = expand_design(c.design);
    d.groups = static_cast<int>(paths.size());
    d.periods = static_cast<int>(paths.front().size());
  } else {
    d.groups = c.groups;
    d.periods = c.periods;
  }
  const int G = d.groups, T = d.periods;
  d.treatments.assign(static_cast<std::size_t>(G) * T, 0);

  switch (c.adoption) {
    case Adoption::Explicit:
      for (int g = 0; g < G; ++g)
        for (int t = 0; t < T; ++t) d.treatments[static_cast<std::size_t>(g) * T + t] = paths[g][t] - '0';
      break;
    case Adoption::General:
      for (int g = 0; g < G; ++g) {
        int state = u(rng) < 0.5 ? 1 : 0;
        for (int t = 0; t < T; ++t) {
          if (t > 0 && u(rng) < c.switch_probability) state = 1 - state;
          d.treatments[static_cast<std::size_t>(g) * T + t] = state;
        }
      }
      break;
    default: {
      // Adoption period a in 1..T-1 (0-based); later adopters are weighted
      // up or down for the skewed variants.
      std::vector<double> weight(static_cast<std::size_t>(T - 1));
      for (int a = 1; a < T; ++a) {
        const double early = T - a, late = a;
        weight[a - 1] = c.adoption == Adoption::MoreEarlyAdopters  ? early * early
                        : c.adoption == Adoption::MoreLateAdopters ? late * late
                                                                   : 1.0;
      }
      std::discrete_distribution<int> adopt(weight.begin(), weight.end());
      const int never = static_cast<int>(std::lround(c.never_treated_share * G));
      for (int g = never; g < G; ++g) {
        const int a = 1 + adopt(rng);
        for (int t = a; t < T; ++t) d.treatments[static_cast<std::size_t>(g) * T + t] = 1;
      }
    }
  }

  d.counts.resize(d.treatments.size());
  for (int g = 0; g < G; ++g)
    for (int t = 0; t < T; ++t) d.counts[static_cast<std::size_t>(g) * T + t] = units_for(c, G, T, g, t);

  d.gamma = c.group_effects;
  if (d.gamma.empty())
    for (int g = 0; g < G; ++g) d.gamma.push_back(c.group_effect_sd * z(rng));
  d.lambda = c.time_trends;
  if (d.lambda.empty())
    for (int t = 0; t < T; ++t) d.lambda.push_back(c.time_trend_slope * t);

  std::vector<double> group_component(static_cast<std::size_t>(G));
  for (auto& v : group_component) v = z(rng);
  d.effects.resize(d.treatments.size());
  for (int g = 0; g < G; ++g) {
    int exposure = 0;
    for (int t = 0; t < T; ++t) {
      const std::size_t i = static_cast<std::size_t>(g) * T + t;
      exposure = d.treatments[i] ? exposure + 1 : 0;
      double delta = c.effect;
      switch (c.effect_profile) {
        case EffectProfile::Constant:
        case EffectProfile::Random: break;
        case EffectProfile::GroupVarying: delta += c.effect_spread * group_component[g]; break;
        case EffectProfile::TimeVarying: delta += c.effect_growth * t; break;
        case EffectProfile::Additive:
          delta += c.effect_spread * group_component[g] + c.effect_growth * t;
          break;
        case EffectProfile::DynamicBuildup: delta += c.effect_growth * (std::max(exposure, 1) - 1); break;
      }
      d.effects[i] = delta;
    }
  }
  return d;
}

SimulatedDraw simulate_cells(const DgpConfig& config, std::uint64_t index) {
  const std::uint64_t design_seed =
      config.fixed_design ? derive_seed(config.seed, 0) : derive_seed(derive_seed(config.seed, index + 1), 0);
  return simulate_cells(config, build_design(config, design_seed), index);
}

SimulatedDraw simulate_cells(const DgpConfig& config, const PlantedDesign& design, std::uint64_t index) {
  std::vector<CompensatedSum> sums(design.treatments.size());
  auto effects = run_draw(config, design, index,
                          [&](std::size_t cell, std::int64_t, double y) { sums[cell] += y; });
  std::vector<double> means(sums.size());
  for (std::size_t i = 0; i < sums.size(); ++i)
    means[i] = sums[i].value() / static_cast<double>(design.counts[i]);
  SimulatedDraw draw{CellTable(number_labels(design.groups), number_labels(design.periods), design.counts,
                               std::move(means), design.treatments),
                     std::move(effects)};
  return draw;
}

std::vector<Observation> generate_panel(const DgpConfig& config, std::uint64_t index) {
  const std::uint64_t design_seed =
      config.fixed_design ? derive_seed(config.seed, 0) : derive_seed(derive_seed(config.seed, index + 1), 0);
  const PlantedDesign d = build_design(config, design_seed);
  const auto groups = number_labels(d.groups);
  const auto periods = number_labels(d.periods);
  std::vector<Observation> out;
  run_draw(config, d, index, [&](std::size_t cell, std::int64_t unit, double y) {
    const int g = static_cast<int>(cell / d.periods);
    const int t = static_cast<int>(cell % d.periods);
    out.push_back({"u" + std::to_string(unit + 1), groups[g], periods[t], y,
                   static_cast<double>(d.treatments[cell]), 1});
  });
  return out;
}

double treated_effect_target(const CellTable& cells, std::span<const double> effects) {
  CompensatedSum num;
  for (int g = 0; g < cells.groups(); ++g)
    for (int t = 0; t < cells.periods(); ++t)
      if (cells.treatment(g, t)) num += static_cast<double>(cells.count(g, t)) * effects[cells.index(g, t)];
  if (cells.treated_count() == 0) return std::numeric_limits<double>::quiet_NaN();
  return num.value() / static_cast<double>(cells.treated_count());
}

double switcher_effect_target(const CellTable& cells, std::span<const double> effects) {
  return direction_target(cells, effects, -1, -1);
}

double planted_target(const EstimatorId& id, const CellTable& cells, std::span<const double> effects) {
  using K = EstimatorId::Kind;
  switch (id.kind) {
    case K::Fe:
    case K::Fd: return treated_effect_target(cells, effects);
    case K::Didm: return switcher_effect_target(cells, effects);
    case K::Joiners: return direction_target(cells, effects, 0, 1);
    case K::Leavers: return direction_target(cells, effects, 1, 0);
    case K::Placebo: return 0.0;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

const MonteCarloSummary* MonteCarloReport::find(const EstimatorId& id) const {
  for (const auto& s : summaries)
    if (s.id == id) return &s;
  return nullptr;
}

MonteCarloReport monte_carlo(const DgpConfig& config, std::span<const EstimatorId> estimators,
                             int replications, int threads) {
  validate_config(config);
  if (replications < 100)
    bad_config("monte carlo needs at least 100 replications, got " + std::to_string(replications));
  if (estimators.empty()) bad_config("no estimators");

  const std::size_t R = static_cast<std::size_t>(replications);
  const std::size_t k = estimators.size();
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> est(R * k, nan), tgt(R * k, nan);
  std::vector<double> lo(R, std::numeric_limits<double>::infinity());
  std::vector<double> hi(R, -std::numeric_limits<double>::infinity());

  PlantedDesign fixed;
  if (config.fixed_design) fixed = build_design(config, derive_seed(config.seed, 0));

  auto run_one = [&](std::size_t r) {
    const SimulatedDraw draw = config.fixed_design ? simulate_cells(config, fixed, r) : simulate_cells(config, r);
    for (std::size_t i = 0; i < draw.effects.size(); ++i) {
      if (!draw.cells.treatments()[i]) continue;
      lo[r] = std::min(lo[r], draw.effects[i]);
      hi[r] = std::max(hi[r], draw.effects[i]);
    }
    for (std::size_t j = 0; j < k; ++j) {
      std::optional<double> v;
      try {
        v = try_compute_estimator(draw.cells, estimators[j]);
      } catch (const Error&) {
        // HorizonTooLarge and friends: count as a failed draw.
      }
      const double target = planted_target(estimators[j], draw.cells, draw.effects);
      if (v && std::isfinite(*v) && std::isfinite(target)) {
        est[r * k + j] = *v;
        tgt[r * k + j] = target;
      }
    }
  };

  const int n_threads = std::clamp(threads, 1, replications);
  if (n_threads == 1) {
    for (std::size_t r = 0; r < R; ++r) run_one(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i)
      pool.emplace_back([&] {
        for (std::size_t r; (r = next.fetch_add(1)) < R;) run_one(r);
      });
    for (auto& t : pool) t.join();
  }

  MonteCarloReport report;
  report.replications = replications;
  report.seed = config.seed;
  report.min_treated_effect = *std::min_element(lo.begin(), lo.end());
  report.max_treated_effect = *std::max_element(hi.begin(), hi.end());
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> values, targets, diffs;
    for (std::size_t r = 0; r < R; ++r) {
      const double v = est[r * k + j];
      if (std::isnan(v)) continue;
      values.push_back(v);
      targets.push_back(tgt[r * k + j]);
      diffs.push_back(v - tgt[r * k + j]);
    }
    MonteCarloSummary s;
    s.id = estimators[j];
    s.replications = replications;
    s.draws_used = static_cast<int>(values.size());
    s.draws_failed = replications - s.draws_used;
    if (!values.empty()) {
      const double n = static_cast<double>(values.size());
      s.mean_estimate = compensated_sum(values) / n;
      s.mean_target = compensated_sum(targets) / n;
      s.bias = compensated_sum(diffs) / n;
      s.mc_se = sample_sd(diffs) / std::sqrt(n);
      const double sd = sample_sd(values);
      s.variance = sd * sd;
    } else {
      s.mean_estimate = s.mean_target = s.bias = s.mc_se = s.variance = nan;
    }
    report.summaries.push_back(s);
  }
  return report;
}

MonteCarloReport monte_carlo(const DgpConfig& config, int threads) {
  return monte_carlo(config, config.estimators, config.replications, threads);
}

}  // namespace twfe
