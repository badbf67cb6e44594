#include "twfe/bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <thread>

#include "twfe/error.hpp"
#include "twfe/seed.hpp"
#include "twfe/summation.hpp"

namespace twfe {

namespace {

// Inverse standard normal CDF by bisection on erfc; only called once per report.
double normal_quantile(double p) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double cdf = 0.5 * std::erfc(-mid / std::sqrt(2.0));
    (cdf < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::uint64_t replication_seed(std::uint64_t master, std::uint64_t b) noexcept {
  return derive_seed(master, b);
}

std::vector<int> bootstrap_draw(int groups, std::uint64_t master, std::uint64_t b) {
  std::mt19937_64 rng(replication_seed(master, b));
  std::uniform_int_distribution<int> pick(0, groups - 1);
  std::vector<int> draw(static_cast<std::size_t>(groups));
  for (auto& g : draw) g = pick(rng);
  return draw;
}

double sample_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double mean = compensated_sum(xs) / static_cast<double>(xs.size());
  CompensatedSum ss;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss.value() / static_cast<double>(xs.size() - 1));
}

const EstimateSummary* BootstrapReport::find(const EstimatorId& id) const {
  for (const auto& e : estimates)
    if (e.id == id) return &e;
  return nullptr;
}

const PairwiseDifference* BootstrapReport::find_difference(const EstimatorId& a,
                                                           const EstimatorId& b) const {
  for (const auto& d : differences)
    if (d.first == a && d.second == b) return &d;
  return nullptr;
}

BootstrapReport cluster_bootstrap(const CellTable& cells, std::span<const EstimatorId> estimators,
                                  const BootstrapOptions& options) {
  if (cells.groups() < 2) throw Error(ErrorCode::TooFewGroups, "bootstrap needs at least 2 groups");
  if (options.replications < 2) throw Error(ErrorCode::InvalidArgument, "bootstrap needs B >= 2");
  if (estimators.empty()) throw Error(ErrorCode::InvalidArgument, "no estimator requested");
  if (!(options.level > 0.0 && options.level < 1.0))
    throw Error(ErrorCode::InvalidArgument, "confidence level must lie in (0, 1)");

  const std::size_t k = estimators.size();
  std::vector<double> full(k);
  for (std::size_t j = 0; j < k; ++j) full[j] = compute_estimator(cells, estimators[j]);

  const auto B = static_cast<std::size_t>(options.replications);
  std::vector<std::optional<std::vector<double>>> draws(B);

  auto run_one = [&](std::size_t b) {
    const auto pick = bootstrap_draw(cells.groups(), options.seed, b);
    const CellTable sample = cells.select_groups(pick);
    std::vector<double> values(k);
    for (std::size_t j = 0; j < k; ++j) {
      const auto v = try_compute_estimator(sample, estimators[j]);
      if (!v || !std::isfinite(*v)) return;
      values[j] = *v;
    }
    draws[b] = std::move(values);
  };

  const int threads = std::clamp(options.threads, 1, static_cast<int>(B));
  if (threads == 1) {
    for (std::size_t b = 0; b < B; ++b) run_one(b);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    for (int i = 0; i < threads; ++i) {
      pool.emplace_back([&] {
        for (std::size_t b; (b = next.fetch_add(1)) < B && !failed.load();) {
          try {
            run_one(b);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<std::vector<double>> used;
  for (auto& d : draws)
    if (d) used.push_back(std::move(*d));
  if (used.size() < 2)
    throw Error(ErrorCode::AllDrawsDegenerate,
                "only " + std::to_string(used.size()) + " of " + std::to_string(B) +
                    " bootstrap draws were usable");

  BootstrapReport report;
  report.replications_requested = options.replications;
  report.replications_used = static_cast<int>(used.size());
  report.replications_skipped = options.replications - report.replications_used;
  report.seed = options.seed;
  report.level = options.level;

  const double alpha = 1.0 - options.level;
  const double z = normal_quantile(1.0 - alpha / 2.0);
  std::vector<double> column(used.size());
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t b = 0; b < used.size(); ++b) column[b] = used[b][j];
    EstimateSummary s;
    s.id = estimators[j];
    s.estimate = full[j];
    s.se = sample_sd(column);
    std::sort(column.begin(), column.end());
    s.ci_lower = sample_quantile(column, alpha / 2.0);
    s.ci_upper = sample_quantile(column, 1.0 - alpha / 2.0);
    s.normal_lower = full[j] - z * s.se;
    s.normal_upper = full[j] + z * s.se;
    report.estimates.push_back(s);
  }

  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t c = a + 1; c < k; ++c) {
      for (std::size_t b = 0; b < used.size(); ++b) column[b] = used[b][a] - used[b][c];
      PairwiseDifference d;
      d.first = estimators[a];
      d.second = estimators[c];
      d.difference = full[a] - full[c];
      d.se = sample_sd(column);
      d.t_stat = d.se > 0.0 ? d.difference / d.se : std::numeric_limits<double>::quiet_NaN();
      report.differences.push_back(d);
    }
  }
  return report;
}

BootstrapReport cluster_bootstrap(std::span<const Observation> observations,
                                  std::span<const EstimatorId> estimators,
                                  const BootstrapOptions& options) {
  return cluster_bootstrap(aggregate_cells(observations), estimators, options);
}

bool rejects_at_five_percent(double t_stat) noexcept {
  return std::isfinite(t_stat) ? std::fabs(t_stat) > 1.96 : std::isinf(t_stat);
}

JointTestVerdict joint_assumption_test(const BootstrapReport& report) {
  const EstimatorId fe{EstimatorId::Kind::Fe, 0};
  const EstimatorId fd{EstimatorId::Kind::Fd, 0};
  const PairwiseDifference* d = report.find_difference(fe, fd);
  double sign = 1.0;
  if (!d) {
    d = report.find_difference(fd, fe);
    sign = -1.0;
  }
  if (!d) throw Error(ErrorCode::MissingEstimate, "joint test needs both fe and fd in the report");
  JointTestVerdict v;
  v.difference = sign * d->difference;
  v.se = d->se;
  v.t_stat = sign * d->t_stat;
  v.reject = rejects_at_five_percent(v.t_stat);
  return v;
}

}  // namespace twfe
