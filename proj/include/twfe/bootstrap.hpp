#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "twfe/estimators.hpp"
#include "twfe/panel.hpp"

namespace twfe {

struct BootstrapOptions {
  int replications = 500;
  std::uint64_t seed = 0;
  int threads = 1;
  double level = 0.95;
};

struct EstimateSummary {
  EstimatorId id;
  double estimate = 0.0;  // full-sample value
  double se = 0.0;
  // Percentile interval (default) and estimate +- z*se.
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double normal_lower = 0.0;
  double normal_upper = 0.0;
};

struct PairwiseDifference {
  EstimatorId first;
  EstimatorId second;
  double difference = 0.0;  // first - second, full sample
  double se = 0.0;
  double t_stat = 0.0;      // NaN when se == 0
};

struct BootstrapReport {
  std::vector<EstimateSummary> estimates;
  std::vector<PairwiseDifference> differences;
  int replications_requested = 0;
  int replications_used = 0;
  int replications_skipped = 0;
  std::uint64_t seed = 0;
  double level = 0.95;

  const EstimateSummary* find(const EstimatorId& id) const;
  const PairwiseDifference* find_difference(const EstimatorId& a, const EstimatorId& b) const;
};

/// Counter-based seed for replication b: splitmix64(master + (b+1)*golden).
/// Depends only on (master, b), so any thread schedule gives the same draws.
std::uint64_t replication_seed(std::uint64_t master, std::uint64_t b) noexcept;

/// Group indices drawn with replacement for replication b.
std::vector<int> bootstrap_draw(int groups, std::uint64_t master, std::uint64_t b);

/// Group-clustered bootstrap. A draw where any requested estimator is
/// undefined (collinear resample, no switchers, ...) is skipped as a whole and
/// counted. Throws TooFewGroups, InvalidArgument (B < 2), AllDrawsDegenerate,
/// or the full-sample estimator's own error.
BootstrapReport cluster_bootstrap(const CellTable& cells, std::span<const EstimatorId> estimators,
                                  const BootstrapOptions& options);
BootstrapReport cluster_bootstrap(std::span<const Observation> observations,
                                  std::span<const EstimatorId> estimators,
                                  const BootstrapOptions& options);

struct JointTestVerdict {
  double difference = 0.0;
  double se = 0.0;
  double t_stat = 0.0;
  bool reject = false;
};

/// |t| > 1.96 on beta_fe - beta_fd. A NaN t (zero se) never rejects.
bool rejects_at_five_percent(double t_stat) noexcept;
/// Throws MissingEstimate when fe or fd is absent from the report.
JointTestVerdict joint_assumption_test(const BootstrapReport& report);

/// Type-7 sample quantile (linear interpolation); `sorted` must be ascending.
double sample_quantile(std::span<const double> sorted, double p);
/// Sample standard deviation (n - 1 denominator); 0 for n < 2.
double sample_sd(std::span<const double> xs);

}  // namespace twfe
