#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace twfe {

/// One row of a long-format panel. Cell-level rows carry their cell size in
/// `count` and the cell mean in `outcome`; unit-level rows keep count = 1.
struct Observation {
  std::string unit;  // optional; empty when the input has no unit column
  std::string group;
  std::string time;
  double outcome = 0.0;
  double treatment = 0.0;
  std::int64_t count = 1;
};

/// The (g,t)-aggregated panel: a complete G x T grid of cells with positive
/// counts, binary treatments and count-weighted mean outcomes. Marginals are
/// computed once at construction.
///
/// Groups and periods are addressed by 0-based index; period index t stands
/// for the (t+1)-th period in sorted label order.
class CellTable {
 public:
  CellTable() = default;

  /// Cells are row-major (group-major). Throws MissingCell on a zero count,
  /// InvalidTreatment on a non-binary treatment.
  CellTable(std::vector<std::string> group_labels,
            std::vector<std::string> period_labels,
            std::vector<std::int64_t> counts, std::vector<double> outcomes,
            std::vector<int> treatments);

  int groups() const noexcept { return static_cast<int>(group_labels_.size()); }
  int periods() const noexcept { return static_cast<int>(period_labels_.size()); }
  std::size_t size() const noexcept { return counts_.size(); }

  std::size_t index(int g, int t) const noexcept {
    return static_cast<std::size_t>(g) * period_labels_.size() +
           static_cast<std::size_t>(t);
  }

  std::int64_t count(int g, int t) const { return counts_[index(g, t)]; }
  double outcome(int g, int t) const { return outcomes_[index(g, t)]; }
  int treatment(int g, int t) const { return treatments_[index(g, t)]; }

  double group_treatment_mean(int g) const { return group_d_[g]; }    // D_{g,.}
  double period_treatment_mean(int t) const { return period_d_[t]; }  // D_{.,t}
  double treatment_mean() const noexcept { return overall_d_; }       // D_{.,.}
  std::int64_t group_count(int g) const { return group_n_[g]; }       // N_{g,.}
  std::int64_t period_count(int t) const { return period_n_[t]; }     // N_{.,t}
  std::int64_t total_count() const noexcept { return total_n_; }      // N
  std::int64_t treated_count() const noexcept { return treated_n_; }  // N_1

  const std::vector<std::string>& group_labels() const noexcept { return group_labels_; }
  const std::vector<std::string>& period_labels() const noexcept { return period_labels_; }
  const std::vector<std::int64_t>& counts() const noexcept { return counts_; }
  const std::vector<double>& outcomes() const noexcept { return outcomes_; }
  const std::vector<int>& treatments() const noexcept { return treatments_; }

  /// Builds a new table whose g-th group is group `draw[g]` of this one.
  /// Repeated draws get fresh labels ("label#k") so every row stays a
  /// distinct group.
  CellTable select_groups(std::span<const int> draw) const;

  /// Same design and counts, new outcome vector.
  CellTable with_outcomes(std::vector<double> outcomes) const;

  bool operator==(const CellTable&) const = default;

 private:
  void compute_marginals();

  std::vector<std::string> group_labels_;
  std::vector<std::string> period_labels_;
  std::vector<std::int64_t> counts_;
  std::vector<double> outcomes_;
  std::vector<int> treatments_;

  std::vector<double> group_d_;
  std::vector<double> period_d_;
  std::vector<std::int64_t> group_n_;
  std::vector<std::int64_t> period_n_;
  double overall_d_ = 0.0;
  std::int64_t total_n_ = 0;
  std::int64_t treated_n_ = 0;
};

/// Aggregates unit-level (or cell-level) rows into a CellTable.
///
/// Treatments within 1e-9 of 0 or 1 are snapped; anything else is rejected.
/// Period labels are ranked numerically when every label parses as a number,
/// lexicographically otherwise; group labels are ordered the same way.
/// Throws EmptyInput, InvalidTreatment, MixedTreatmentInCell,
/// DuplicateObservation or MissingCell.
CellTable aggregate_cells(std::span<const Observation> observations);

/// Sorted order used for group and period labels.
std::vector<std::string> sorted_labels(std::vector<std::string> labels);

struct DesignReport {
  bool is_balanced = true;
  bool is_sharp = true;
  bool is_staggered = true;
  /// N_{g,t}/N_{g,t-1} identical across groups for every t.
  bool constant_growth = true;
  /// N_{g,t} identical across t within every group.
  bool time_invariant_counts = true;
  /// Indexed by period; entry t refers to the switch from t-1 to t. Entry 0
  /// is vacuously true.
  std::vector<bool> stable_groups_ok;
  /// Indexed by period; entry t refers to the history t-2, t-1, t. Entries 0
  /// and 1 are vacuously true.
  std::vector<bool> stable_groups_placebo_ok;

  bool all_stable_groups_ok() const;
  bool all_stable_groups_placebo_ok() const;
};

DesignReport validate_design(const CellTable& cells);

}  // namespace twfe
