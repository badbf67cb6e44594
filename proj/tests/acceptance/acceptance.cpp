// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "twfe/didm.hpp"
#include "twfe/error.hpp"
#include "twfe/regression.hpp"
#include "twfe/robustness.hpp"
#include "twfe/simulation.hpp"
#include "twfe/weights.hpp"

using namespace twfe;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

bool close(double a, double b, double tol) { return std::fabs(a - b) <= tol; }
bool rel_close(double a, double b, double tol) { return std::fabs(a - b) <= tol * std::max(1.0, std::fabs(b)); }

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double contribution_sum(const WeightTable& w) {
  double s = 0.0;
  for (const auto& e : w.entries) s += e.contribution();
  return s;
}

// Random panel on which both regressions are defined.
CellTable regular_panel(std::mt19937_64& rng, fixture::RandomPanelOptions o = {}) {
  for (;;) {
    CellTable c = fixture::random_panel(rng, o);
    if (!try_beta_fe(c).degenerate && !try_beta_fd(c).degenerate) return c;
  }
}

Outcome worked_example() {
  const CellTable c = fixture::two_by_three();
  const FeResiduals r = residualize_fe(c);
  const WeightTable w = fe_weights(c, r);
  const double beta = beta_fe(c, r).beta;
  const double eps[3] = {r.at(0, 2), r.at(1, 1), r.at(1, 2)};
  const double eps_want[3] = {1.0 / 6, 1.0 / 3, -1.0 / 6};
  const double contrib_want[3] = {0.5, 1.0, -0.5};
  const double weight_want[3] = {1.5, 3.0, -1.5};
  bool ok = w.entries.size() == 3 && close(beta, -0.5, 1e-10);
  double worst = std::fabs(beta + 0.5);
  for (int i = 0; ok && i < 3; ++i) {
    worst = std::max({worst, std::fabs(eps[i] - eps_want[i]), std::fabs(w.entries[i].contribution() - contrib_want[i]),
                      std::fabs(w.entries[i].weight - weight_want[i])});
  }
  ok = ok && worst <= 1e-10;
  return {ok, fmt("eps=(%.6f, %.6f, %.6f) share*w=(%.3f, %.3f, %.3f) w=(%.3f, %.3f, %.3f) beta=%.6f max err %.1e", eps[0],
                  eps[1], eps[2], w.entries[0].contribution(), w.entries[1].contribution(), w.entries[2].contribution(),
                  w.entries[0].weight, w.entries[1].weight, w.entries[2].weight, beta, worst)};
}

Outcome weight_identities() {
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const CellTable c = regular_panel(rng);
    worst = std::max(worst, std::fabs(contribution_sum(fe_weights(c)) - 1.0));
    worst = std::max(worst, std::fabs(contribution_sum(fd_weights(c)) - 1.0));
  }
  return {worst <= 1e-10, fmt("1000 panels, max |sum share*w - 1| = %.2e (fe and fd)", worst)};
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(1002);
  double worst = 0.0;
  int mismatched_degeneracy = 0, compared = 0, drawn = 0;
  while (compared < 1000) {
    const CellTable c = fixture::random_panel(rng);
    ++drawn;
    const auto fe = try_beta_fe(c), fd = try_beta_fd(c);
    const auto ofe = oracle::ols_fe_beta(c), ofd = oracle::ols_fd_beta(c);
    if (fe.degenerate != !ofe.has_value() || fd.degenerate != !ofd.has_value()) ++mismatched_degeneracy;
    if (fe.degenerate || fd.degenerate || !ofe || !ofd) continue;
    worst = std::max(worst, std::fabs(fe.beta - *ofe) / std::max(1.0, std::fabs(*ofe)));
    worst = std::max(worst, std::fabs(fd.beta - *ofd) / std::max(1.0, std::fabs(*ofd)));
    ++compared;
  }
  return {worst <= 1e-8 && mismatched_degeneracy == 0,
          fmt("1000 panels (%d drawn), max scaled |beta - beta_ols| = %.2e, degeneracy disagreements %d", drawn, worst,
              mismatched_degeneracy)};
}

Outcome decomposition_identity() {
  std::mt19937_64 rng(1003);
  std::normal_distribution<double> z(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    CellTable c = regular_panel(rng);
    std::vector<double> y(c.size()), delta(c.size()), a(c.groups()), l(c.periods());
    for (auto& v : a) v = 3.0 * z(rng);
    for (auto& v : l) v = 3.0 * z(rng);
    for (int g = 0; g < c.groups(); ++g)
      for (int t = 0; t < c.periods(); ++t) {
        const auto k = c.index(g, t);
        delta[k] = 1.0 + 2.0 * z(rng);
        y[k] = a[g] + l[t] + c.treatment(g, t) * delta[k];
      }
    c = c.with_outcomes(y);
    double fe = 0.0, fd = 0.0;
    for (const auto& e : fe_weights(c).entries) fe += e.contribution() * delta[c.index(e.group, e.period)];
    for (const auto& e : fd_weights(c).entries) fd += e.contribution() * delta[c.index(e.group, e.period)];
    worst = std::max({worst, std::fabs(beta_fe(c).beta - fe) / std::max(1.0, std::fabs(fe)),
                      std::fabs(beta_fd(c).beta - fd) / std::max(1.0, std::fabs(fd))});
  }
  return {worst <= 1e-8, fmt("500 noiseless panels, max scaled |beta - sum share*w*Delta| = %.2e (fe and fd)", worst)};
}

Outcome sign_predicates() {
  std::mt19937_64 rng(1004);
  fixture::RandomPanelOptions o;
  o.staggered = true;
  o.time_invariant_counts = true;
  std::size_t mono = 0, sign = 0;
  int predicted_negative = 0;
  for (int i = 0; i < 1000; ++i) {
    const CellTable c = regular_panel(rng, o);
    mono += check_weight_monotonicity(c, fe_weights(c)).size();
    const WeightTable fd = fd_weights(c);
    sign += check_fd_sign_pattern(c, fd).size();
    for (const auto& e : fd.entries) predicted_negative += fd_weight_predicted_negative(c, e.group, e.period);
  }
  return {mono == 0 && sign == 0,
          fmt("1000 staggered designs: %zu monotonicity and %zu sign violations (%d negative fd weights predicted)", mono,
              sign, predicted_negative)};
}

Outcome qp_agreement() {
  std::mt19937_64 rng(1006);
  std::uniform_int_distribution<int> size(2, 8);
  std::normal_distribution<double> z(0.0, 1.5);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  auto table_of = [](const std::vector<double>& w, const std::vector<double>& p) {
    WeightTable t;
    for (std::size_t i = 0; i < w.size(); ++i) t.entries.push_back({static_cast<int>(i), 0, p[i], w[i]});
    summarize(t);
    return t;
  };

  const std::vector<double> w0{1.0, 0.5, -0.5}, p0(3, 1.0 / 3);
  const double fixture_value = sigma_lower_lower(-0.5, table_of(w0, p0)).value;
  const double fixture_oracle = oracle::qp_sigma_lower_lower(-0.5, w0, p0).value;
  double worst = std::max(std::fabs(fixture_value - std::sqrt(2.0)), std::fabs(fixture_oracle - std::sqrt(2.0)));

  int tables = 0;
  while (tables < 500) {
    const int n = size(rng);
    std::vector<double> p(n), w(n);
    double total = 0.0, fit = 0.0;
    for (auto& v : p) total += (v = u(rng));
    for (auto& v : p) v /= total;
    for (int k = 0; k < n; ++k) fit += p[k] * (w[k] = z(rng));
    if (std::fabs(fit) < 0.05) continue;
    for (auto& v : w) v /= fit;
    const WeightTable t = table_of(w, p);
    if (t.summary.n_negative == 0) continue;
    const double beta = z(rng);
    if (std::fabs(beta) < 1e-3) continue;
    const double closed = sigma_lower_lower(beta, t).value;
    const double brute = oracle::qp_sigma_lower_lower(beta, w, p).value;
    worst = std::max(worst, std::fabs(closed - brute) / std::max(1.0, brute));
    ++tables;
  }
  return {worst <= 1e-6, fmt("sqrt(2) fixture %.9f (oracle %.9f); 500 tables n<=8, max scaled gap %.2e", fixture_value,
                             fixture_oracle, worst)};
}

DgpConfig harness_config() {
  DgpConfig c;
  c.groups = 50;
  c.periods = 5;
  c.adoption = Adoption::Staggered;
  c.never_treated_share = 0.2;
  c.effect_profile = EffectProfile::Additive;  // effects vary by group and period
  c.effect = 1.0;
  c.effect_spread = 1.0;
  c.effect_growth = 0.5;
  c.noise_sd = 1.0;
  c.seed = 2024;
  return c;
}

const EstimatorId kFe{EstimatorId::Kind::Fe, 0};
const EstimatorId kDidm{EstimatorId::Kind::Didm, 0};
const EstimatorId kPlacebo{EstimatorId::Kind::Placebo, 1};

Outcome switcher_unbiasedness() {
  const std::vector<EstimatorId> ids{kDidm};
  const MonteCarloReport r = monte_carlo(harness_config(), ids, 2000);
  const MonteCarloSummary& s = r.summaries[0];
  const bool unbiased = s.draws_used == 2000 && std::fabs(s.bias) <= 3.0 * s.mc_se;

  DgpConfig rev = parse_dgp_config_string(
      "design = 000x1;001x10;011x10\n"
      "effect_profile = dynamic_buildup\n"
      "effect = 1\n"
      "effect_growth = 3\n"
      "noise_sd = 0.5\n"
      "seed = 3\n");
  const std::vector<EstimatorId> both{kFe, kDidm};
  const MonteCarloReport rr = monte_carlo(rev, both, 2000);
  const auto& fe = rr.summaries[0];
  const auto& dm = rr.summaries[1];
  const bool reversal = fe.mean_estimate < 0.0 && rr.min_treated_effect > 0.0;
  const bool rev_didm = std::fabs(dm.bias) <= 3.0 * dm.mc_se;
  return {unbiased && reversal && rev_didm,
          fmt("G=50 T=5 R=2000: mean DID_M %.4f vs target %.4f, bias/MC SE %.2f; reversal design: mean beta_fe %.4f "
              "with effects in [%.1f, %.1f], DID_M bias/MC SE %.2f",
              s.mean_estimate, s.mean_target, s.bias / s.mc_se, fe.mean_estimate, rr.min_treated_effect,
              rr.max_treated_effect, dm.bias / dm.mc_se)};
}

Outcome placebo_nullity() {
  const std::vector<EstimatorId> ids{kPlacebo};
  const MonteCarloReport r = monte_carlo(harness_config(), ids, 2000);
  const auto& s = r.summaries[0];
  return {s.draws_used == 2000 && std::fabs(s.mean_estimate) <= 3.0 * s.mc_se,
          fmt("G=50 T=5 R=2000: mean placebo %.5f, MC SE %.5f (%.2f SE)", s.mean_estimate, s.mc_se,
              s.mean_estimate / s.mc_se)};
}

Outcome two_period_equality() {
  std::mt19937_64 rng(1009);
  fixture::RandomPanelOptions o;
  o.min_periods = o.max_periods = 2;
  o.time_invariant_counts = true;
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const CellTable c = regular_panel(rng, o);
    worst = std::max(worst, std::fabs(beta_fe(c).beta - beta_fd(c).beta) / std::max(1.0, std::fabs(beta_fd(c).beta)));
  }
  return {worst <= 1e-10, fmt("200 two-period panels, max scaled |beta_fe - beta_fd| = %.2e", worst)};
}

Outcome variance_ordering() {
  DgpConfig c = harness_config();
  c.effect_profile = EffectProfile::Constant;
  c.seed = 77;
  const std::vector<EstimatorId> ids{kFe, kDidm};
  const MonteCarloReport r = monte_carlo(c, ids, 2000);
  const double vfe = r.summaries[0].variance, vdm = r.summaries[1].variance;
  return {vfe <= 1.05 * vdm, fmt("R=2000: Var(beta_fe) %.5f, Var(DID_M) %.5f, ratio %.3f", vfe, vdm, vfe / vdm)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "worked example exactness", 1, worked_example},
      {2, "weight identities", 10, weight_identities},
      {3, "oracle equivalence", 30, oracle_equivalence},
      {4, "decomposition identity", 10, decomposition_identity},
      {5, "monotonicity and sign predicates", 10, sign_predicates},
      {6, "opposite-sign bound vs brute-force program", 60, qp_agreement},
      {7, "switcher estimator unbiasedness and sign reversal", 120, switcher_unbiasedness},
      {8, "placebo nullity", 120, placebo_nullity},
      {9, "two-period fe = fd", 5, two_period_equality},
      {10, "variance ordering", 120, variance_ordering},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.pass && secs < c.budget_s;
    failures += !pass;
    std::printf("%s criterion %d: %s -- %s [%.2fs / %.0fs]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs, c.budget_s);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
