// twfe: decomposition weights, estimators and simulations from the command line.
//
//   twfe weights  --input panel.csv [--estimator fe|fd] [--covariate COL]
//   twfe estimate --input panel.csv [--estimator fe,fd,didm] [--placebo K]
//                 [--bootstrap B --seed S]
//   twfe simulate --config dgp.cfg [--replications R] [--seed S]
//
// Reports go to stdout as JSON (default) or CSV; warnings and errors go to
// stderr. Exit status 2 means the input or configuration was rejected.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "manifest.hpp"
#include "twfe/bootstrap.hpp"
#include "twfe/csv.hpp"
#include "twfe/didm.hpp"
#include "twfe/error.hpp"
#include "twfe/estimators.hpp"
#include "twfe/regression.hpp"
#include "twfe/robustness.hpp"
#include "twfe/simulation.hpp"
#include "twfe/weights.hpp"

using json = nlohmann::ordered_json;

namespace twfe::cli {
namespace {

struct PanelFlags {
  std::string input;
  std::string group = "group";
  std::string time = "time";
  std::string outcome = "outcome";
  std::string treatment = "treatment";
  std::string count;
  std::string unit;
  std::string output = "json";
};

struct Panel {
  CsvTable table;
  ColumnMap columns;
  CellTable cells;
  DesignReport design;
};

Panel load_panel(const PanelFlags& f) {
  Panel p;
  p.table = read_csv_file(f.input);
  p.columns.group = f.group;
  p.columns.time = f.time;
  p.columns.outcome = f.outcome;
  p.columns.treatment = f.treatment;
  if (!f.count.empty()) p.columns.count = f.count;
  if (!f.unit.empty()) p.columns.unit = f.unit;
  p.cells = aggregate_cells(observations_from_csv(p.table, p.columns));
  p.design = validate_design(p.cells);
  return p;
}

std::string fmt(double x) {
  if (std::isnan(x)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json number_or_null(std::optional<double> x) {
  if (!x || !std::isfinite(*x)) return nullptr;
  return *x;
}

json design_json(const Panel& p) {
  json j;
  j["groups"] = p.cells.groups();
  j["periods"] = p.cells.periods();
  j["n_obs"] = p.cells.total_count();
  j["treated_obs"] = p.cells.treated_count();
  j["staggered"] = p.design.is_staggered;
  j["constant_growth"] = p.design.constant_growth;
  j["time_invariant_counts"] = p.design.time_invariant_counts;
  j["stable_groups"] = p.design.all_stable_groups_ok();
  return j;
}

void emit_csv_manifest(std::ostream& out, const RunManifest& m) {
  out << "# schema_version=" << kSchemaVersion << " version=" << m.version << " input_sha256=" << m.input_digest;
  if (m.seed) out << " seed=" << *m.seed;
  out << " timestamp=" << m.timestamp << "\n";
}

void warn(const std::string& message) { std::cerr << "warning: " << message << "\n"; }

// Count-weighted cell means of a covariate column, aligned with the weight
// table's entries.
std::vector<double> covariate_for(const Panel& p, const std::string& column, const WeightTable& w) {
  const std::size_t col = p.table.column(column);
  const std::size_t gcol = p.table.column(p.columns.group);
  const std::size_t tcol = p.table.column(p.columns.time);
  std::optional<std::size_t> ncol;
  if (p.columns.count) ncol = p.table.column(*p.columns.count);
  else ncol = p.table.find_column("count");

  std::map<std::string, int> gi, ti;
  for (int g = 0; g < p.cells.groups(); ++g) gi[p.cells.group_labels()[g]] = g;
  for (int t = 0; t < p.cells.periods(); ++t) ti[p.cells.period_labels()[t]] = t;
  std::vector<double> sum(p.cells.size(), 0.0), n(p.cells.size(), 0.0);
  for (std::size_t r = 0; r < p.table.rows.size(); ++r) {
    const auto& row = p.table.rows[r];
    const std::size_t k = p.cells.index(gi.at(row[gcol]), ti.at(row[tcol]));
    const double weight = ncol ? parse_double(row[*ncol], r, p.table.header[*ncol]) : 1.0;
    sum[k] += weight * parse_double(row[col], r, column);
    n[k] += weight;
  }
  std::vector<double> out;
  for (const auto& e : w.entries) {
    const std::size_t k = p.cells.index(e.group, e.period);
    out.push_back(sum[k] / n[k]);
  }
  return out;
}

int cmd_weights(const PanelFlags& f, const std::string& estimator, const std::string& covariate, int argc,
                char** argv) {
  const Panel p = load_panel(f);
  WeightTable w;
  RegressionEstimate est;
  if (estimator == "fe") {
    const FeResiduals r = residualize_fe(p.cells);
    est = beta_fe(p.cells, r);
    w = fe_weights(p.cells, r);
  } else if (estimator == "fd") {
    const FdResiduals r = residualize_fd(p.cells);
    est = beta_fd(p.cells, r);
    w = fd_weights(p.cells, r);
  } else {
    throw Error(ErrorCode::InvalidArgument, "weights are defined for fe and fd only, got '" + estimator + "'");
  }
  const RobustnessBounds b = robustness_bounds(est.beta, w);
  std::optional<WeightCorrelation> corr;
  if (!covariate.empty()) corr = correlate_weights(w, covariate_for(p, covariate, w));
  const RunManifest m = make_manifest(argc, argv, f.input, std::nullopt);

  if (f.output == "csv") {
    emit_csv_manifest(std::cout, m);
    std::cout << "group,time,share,weight\n";
    for (const auto& e : w.entries)
      std::cout << p.cells.group_labels()[e.group] << ',' << p.cells.period_labels()[e.period] << ','
                << fmt(e.share) << ',' << fmt(e.weight) << "\n";
    return 0;
  }

  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "weights";
  j["manifest"] = to_json(m);
  j["design"] = design_json(p);
  j["estimator"] = estimator;
  j["beta"] = est.beta;
  j["n_obs"] = est.n_obs;
  json rows = json::array();
  for (const auto& e : w.entries) {
    json r;
    r["group"] = p.cells.group_labels()[e.group];
    r["time"] = p.cells.period_labels()[e.period];
    r["share"] = e.share;
    r["weight"] = e.weight;
    r["contribution"] = e.contribution();
    rows.push_back(r);
  }
  j["weights"] = rows;
  json s;
  s["n_positive"] = w.summary.n_positive;
  s["n_negative"] = w.summary.n_negative;
  s["n_zero"] = w.summary.n_zero;
  s["sum_positive"] = w.summary.sum_positive;
  s["sum_negative"] = w.summary.sum_negative;
  j["summary"] = s;
  json rb;
  rb["sigma_w"] = b.sigma_w;
  rb["sigma_lower"] = number_or_null(b.sigma_lower);
  rb["sigma_lower_lower"] = number_or_null(b.sigma_lower_lower);
  rb["s_index"] = b.s_index ? json(*b.s_index) : json(nullptr);
  if (b.sigma_lower && b.sigma_lower_lower)
    rb["ratio_to_beta"] = {{"sigma_lower", *b.sigma_lower / std::fabs(est.beta)},
                           {"sigma_lower_lower", *b.sigma_lower_lower / std::fabs(est.beta)}};
  j["robustness"] = rb;
  if (corr) {
    json c;
    c["covariate"] = covariate;
    c["correlation"] = corr->correlation;
    c["t_stat"] = number_or_null(corr->t_stat);
    c["n"] = corr->n;
    j["covariate_correlation"] = c;
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

json components_json(const CellTable& cells, const std::vector<PeriodComponent>& per_period) {
  json arr = json::array();
  for (const auto& c : per_period) {
    json r;
    r["time"] = cells.period_labels()[c.period];
    r["did_plus"] = c.plus_defined ? json(c.did_plus) : json(nullptr);
    r["did_minus"] = c.minus_defined ? json(c.did_minus) : json(nullptr);
    r["joiners"] = c.n_joiners;
    r["leavers"] = c.n_leavers;
    r["stable_untreated"] = c.n_stable_untreated;
    r["stable_treated"] = c.n_stable_treated;
    arr.push_back(r);
  }
  return arr;
}

int cmd_estimate(const PanelFlags& f, const std::string& estimators, int placebo, int bootstrap,
                 std::uint64_t seed, int threads, int argc, char** argv) {
  const Panel p = load_panel(f);
  std::vector<EstimatorId> ids = parse_estimators(estimators);
  for (const auto& id : ids)
    if (id.kind == EstimatorId::Kind::Placebo)
      throw Error(ErrorCode::InvalidArgument, "request placebos with --placebo K");
  for (int k = 1; k <= placebo; ++k) ids.push_back({EstimatorId::Kind::Placebo, k});

  json details = json::array();
  std::vector<double> values;
  std::vector<std::int64_t> n_obs;
  std::vector<std::string> warnings;
  for (const auto& id : ids) {
    json d;
    d["estimator"] = id.name();
    switch (id.kind) {
      case EstimatorId::Kind::Fe:
      case EstimatorId::Kind::Fd: {
        const auto r = id.kind == EstimatorId::Kind::Fe ? beta_fe(p.cells) : beta_fd(p.cells);
        values.push_back(r.beta);
        n_obs.push_back(r.n_obs);
        break;
      }
      case EstimatorId::Kind::Didm:
      case EstimatorId::Kind::Joiners:
      case EstimatorId::Kind::Leavers: {
        const DidmResult r = did_m(p.cells);
        values.push_back(compute_estimator(p.cells, id));
        n_obs.push_back(r.n_switchers);
        if (id.kind == EstimatorId::Kind::Didm) {
          d["joiners"] = number_or_null(r.joiners_estimate);
          d["leavers"] = number_or_null(r.leavers_estimate);
          d["per_period"] = components_json(p.cells, r.per_period);
          for (const auto& w : r.stable_group_warnings) warnings.push_back(w.message);
        }
        break;
      }
      case EstimatorId::Kind::Placebo: {
        const PlaceboResult r = did_m_placebo(p.cells, id.horizon);
        values.push_back(r.estimate);
        n_obs.push_back(r.n_switchers);
        d["per_period"] = components_json(p.cells, r.per_period);
        for (const auto& w : r.stable_group_warnings) warnings.push_back(w.message);
        break;
      }
    }
    details.push_back(d);
  }
  for (const auto& w : warnings) warn(w);

  std::optional<BootstrapReport> boot;
  if (bootstrap > 0) boot = cluster_bootstrap(p.cells, ids, {bootstrap, seed, threads, 0.95});
  const RunManifest m = make_manifest(argc, argv, f.input, bootstrap > 0 ? std::optional(seed) : std::nullopt);

  if (f.output == "csv") {
    emit_csv_manifest(std::cout, m);
    std::cout << "estimator,estimate,se,ci_lower,ci_upper,n_obs\n";
    for (std::size_t j = 0; j < ids.size(); ++j) {
      std::cout << ids[j].name() << ',' << fmt(values[j]) << ',';
      if (boot) {
        const auto& s = boot->estimates[j];
        std::cout << fmt(s.se) << ',' << fmt(s.ci_lower) << ',' << fmt(s.ci_upper);
      } else {
        std::cout << ",,";
      }
      std::cout << ',' << n_obs[j] << "\n";
    }
    return 0;
  }

  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "estimate";
  j["manifest"] = to_json(m);
  j["design"] = design_json(p);
  json est = json::array();
  for (std::size_t k = 0; k < ids.size(); ++k) {
    json e;
    e["estimator"] = ids[k].name();
    e["estimate"] = values[k];
    e["n_obs"] = n_obs[k];
    if (boot) {
      const auto& s = boot->estimates[k];
      e["se"] = s.se;
      e["ci_lower"] = s.ci_lower;
      e["ci_upper"] = s.ci_upper;
      e["normal_ci"] = {s.normal_lower, s.normal_upper};
    } else {
      e["se"] = nullptr;
      e["ci_lower"] = nullptr;
      e["ci_upper"] = nullptr;
    }
    est.push_back(e);
  }
  j["estimates"] = est;
  j["details"] = details;

  const bool want_didm = std::any_of(ids.begin(), ids.end(), [](const EstimatorId& id) {
    return id.kind == EstimatorId::Kind::Didm;
  });
  if (placebo > 0 && want_didm) {
    // Re-estimate on the groups whose pre-switch paths enter the placebo.
    const Subsample s = placebo_subsample(p.cells, placebo);
    const DidmResult r = did_m(s);
    j["placebo_subsample"] = {{"horizon", placebo}, {"cells", s.kept_cells().size()},
                              {"didm", r.estimate}, {"n_switchers", r.n_switchers}};
  }
  if (boot) {
    json b;
    b["replications"] = boot->replications_requested;
    b["replications_used"] = boot->replications_used;
    b["replications_skipped"] = boot->replications_skipped;
    b["seed"] = boot->seed;
    b["interval"] = "percentile";
    json diffs = json::array();
    for (const auto& d : boot->differences) {
      diffs.push_back({{"first", d.first.name()}, {"second", d.second.name()}, {"difference", d.difference},
                       {"se", d.se}, {"t_stat", number_or_null(d.t_stat)}});
    }
    b["differences"] = diffs;
    try {
      const JointTestVerdict v = joint_assumption_test(*boot);
      b["fe_fd_test"] = {{"t_stat", number_or_null(v.t_stat)}, {"reject_5pct", v.reject}};
    } catch (const Error&) {
      // fe or fd not requested
    }
    j["bootstrap"] = b;
  }
  j["warnings"] = warnings;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_simulate(const std::string& config_path, std::optional<int> replications, std::optional<std::uint64_t> seed,
                 int threads, const std::string& output, int argc, char** argv) {
  DgpConfig c = load_dgp_config(config_path);
  if (seed) c.seed = *seed;
  if (replications) c.replications = *replications;
  const MonteCarloReport r = monte_carlo(c, c.estimators, c.replications, threads);
  const RunManifest m = make_manifest(argc, argv, config_path, c.seed);

  if (output == "csv") {
    emit_csv_manifest(std::cout, m);
    std::cout << "estimator,replications,draws_used,draws_failed,mean_estimate,mean_target,bias,mc_se,variance\n";
    for (const auto& s : r.summaries)
      std::cout << s.id.name() << ',' << s.replications << ',' << s.draws_used << ',' << s.draws_failed << ','
                << fmt(s.mean_estimate) << ',' << fmt(s.mean_target) << ',' << fmt(s.bias) << ','
                << fmt(s.mc_se) << ',' << fmt(s.variance) << "\n";
    return 0;
  }

  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "simulate";
  j["manifest"] = to_json(m);
  json cfg;
  const PlantedDesign d = build_design(c, 0);
  cfg["groups"] = d.groups;
  cfg["periods"] = d.periods;
  cfg["adoption"] = to_string(c.adoption);
  cfg["effect_profile"] = to_string(c.effect_profile);
  cfg["noise_sd"] = c.noise_sd;
  cfg["replications"] = c.replications;
  cfg["seed"] = c.seed;
  j["config"] = cfg;
  json sums = json::array();
  for (const auto& s : r.summaries) {
    sums.push_back({{"estimator", s.id.name()},
                    {"replications", s.replications},
                    {"draws_used", s.draws_used},
                    {"draws_failed", s.draws_failed},
                    {"mean_estimate", number_or_null(s.mean_estimate)},
                    {"mean_target", number_or_null(s.mean_target)},
                    {"bias", number_or_null(s.bias)},
                    {"mc_se", number_or_null(s.mc_se)},
                    {"bias_over_mc_se", number_or_null(s.mc_se > 0 ? s.bias / s.mc_se : NAN)},
                    {"variance", number_or_null(s.variance)}});
  }
  j["summaries"] = sums;
  j["min_treated_effect"] = number_or_null(r.min_treated_effect);
  j["max_treated_effect"] = number_or_null(r.max_treated_effect);
  const auto* fe = r.find({EstimatorId::Kind::Fe, 0});
  const auto* dm = r.find({EstimatorId::Kind::Didm, 0});
  if (fe && dm && dm->variance > 0) j["variance_ratio_fe_didm"] = number_or_null(fe->variance / dm->variance);
  std::cout << j.dump(2) << "\n";
  return 0;
}

void add_panel_flags(CLI::App* app, PanelFlags& f) {
  app->add_option("--input", f.input, "Long-format CSV panel")->required()->check(CLI::ExistingFile);
  app->add_option("--group", f.group, "Group column")->capture_default_str();
  app->add_option("--time", f.time, "Period column")->capture_default_str();
  app->add_option("--outcome", f.outcome, "Outcome column")->capture_default_str();
  app->add_option("--treatment", f.treatment, "Binary treatment column")->capture_default_str();
  app->add_option("--count", f.count, "Cell-size column for pre-aggregated rows");
  app->add_option("--unit", f.unit, "Unit identifier column");
  app->add_option("--output", f.output, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
}

}  // namespace
}  // namespace twfe::cli

int main(int argc, char** argv) {
  using namespace twfe::cli;
  CLI::App app{"Two-way fixed effects diagnostics and heterogeneity-robust DID"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  PanelFlags wflags, eflags;
  std::string w_estimator = "fe", covariate;
  auto* weights = app.add_subcommand("weights", "Decomposition weights and robustness measures");
  add_panel_flags(weights, wflags);
  weights->add_option("--estimator", w_estimator, "fe or fd")->check(CLI::IsMember({"fe", "fd"}))->capture_default_str();
  weights->add_option("--covariate", covariate, "Correlate weights with this column's cell means");

  std::string e_estimator = "fe,fd,didm";
  int placebo = 0, bootstrap = 0, threads = 1;
  std::uint64_t seed = 0;
  auto* estimate = app.add_subcommand("estimate", "Point estimates, placebos and bootstrap inference");
  add_panel_flags(estimate, eflags);
  estimate->add_option("--estimator", e_estimator, "Comma list of fe, fd, didm, joiners, leavers")
      ->capture_default_str();
  estimate->add_option("--placebo", placebo, "Placebo horizons 1..K")->check(CLI::NonNegativeNumber);
  estimate->add_option("--bootstrap", bootstrap, "Bootstrap replications (0 = none)")->check(CLI::NonNegativeNumber);
  estimate->add_option("--seed", seed, "Bootstrap seed")->capture_default_str();
  estimate->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  std::string config_path, s_output = "json";
  std::optional<int> replications;
  std::optional<std::uint64_t> s_seed;
  int s_threads = 1;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo study from a key=value config");
  simulate->add_option("--config", config_path, "DGP config file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--replications", replications, "Override the config's replications");
  simulate->add_option("--seed", s_seed, "Override the config's seed");
  simulate->add_option("--threads", s_threads, "Worker threads")->check(CLI::PositiveNumber);
  simulate->add_option("--output", s_output, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: UsageError: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*weights) return cmd_weights(wflags, w_estimator, covariate, argc, argv);
    if (*estimate) return cmd_estimate(eflags, e_estimator, placebo, bootstrap, seed, threads, argc, argv);
    return cmd_simulate(config_path, replications, s_seed, s_threads, s_output, argc, argv);
  } catch (const twfe::Error& e) {
    std::cerr << "error: " << e.name() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
