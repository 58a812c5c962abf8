#pragma once
//
// Time-uniform deviation thresholds for pooled arm statistics, subset priors,
// and the confidence bounds on the minimum (maximum) mean they induce.
//
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "minmean/run_state.hpp"

namespace minmean {

inline constexpr double kZeta2 = std::numbers::pi * std::numbers::pi / 6.0;
/// Smallest argument for which threshold_T is certified.
inline constexpr double kMinThresholdArg = 0.04;
/// Largest arm count accepted by the exhaustive subset search.
inline constexpr std::size_t kMaxExhaustiveArms = 12;

/// h(u) = u - ln(u), increasing on [1, inf).
double h(double u);

/// Inverse of h on [1, inf). Newton iteration started at the upper bound
/// x + ln(x + sqrt(2(x - 1))), which lies above the root.
double h_inverse(double x);

/// T(x) = 2 h^-1(1 + (h^-1(1 + x) + ln zeta(2)) / 2), for x >= 0.04.
double threshold_T(double x);

/// 3 ln(1 + ln r) + T(budget_arg): the level a pooled statistic with count r must clear.
double stopping_threshold(double pooled_count, double budget_arg);

using Subset = std::vector<std::size_t>;

/// Prior weights pi(S) over non-empty arm subsets.
class SubsetPrior {
 public:
  enum class Kind { Singletons, SizeUniform, Custom };
  using Entry = std::pair<Subset, double>;

  /// pi(S) = 1/K on singletons.
  static SubsetPrior singletons(std::size_t arms);
  /// pi(S) = 1 / (K binom(K, |S|)): equal mass on every subset size.
  static SubsetPrior size_uniform(std::size_t arms);
  /// Explicit support; weights must be positive and sum to 1.
  static SubsetPrior custom(std::size_t arms, std::vector<Entry> entries);

  Kind kind() const { return kind_; }
  std::size_t arm_count() const { return arms_; }
  double weight(std::span<const std::size_t> subset) const;
  /// ln(1 / pi(S)) for size-determined priors; +inf where pi vanishes.
  double log_inverse_weight_for_size(std::size_t size) const;
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  SubsetPrior(Kind kind, std::size_t arms) : kind_(kind), arms_(arms) {}

  Kind kind_;
  std::size_t arms_;
  std::vector<Entry> entries_;  // Custom only; subsets kept sorted
};

struct AggregateStat {
  Subset subset;
  double pooled_count = 0.0;
  double pooled_mean = 0.0;
};

/// Pooled count and count-weighted mean of the arms in `subset`.
AggregateStat aggregate_stat(const RunState& state, std::span<const std::size_t> subset);

/// Nested: prefixes of arms ordered by empirical mean. Exhaustive: every
/// subset in the prior's support (K <= 12).
enum class SubsetSearch { Nested, Exhaustive };

/// T(ln(1/(delta pi(S)))) for every supported subset, computed once per (prior, delta).
class SubsetThresholds {
 public:
  SubsetThresholds(SubsetPrior prior, double delta);

  const SubsetPrior& prior() const { return prior_; }
  double delta() const { return delta_; }
  /// +inf for subsets outside the support.
  double budget(std::span<const std::size_t> subset) const;

 private:
  SubsetPrior prior_;
  double delta_;
  std::vector<double> by_size_;   // index = subset size
  std::vector<double> by_entry_;  // Custom: aligned with prior_.entries()
};

struct SubsetEvidence {
  bool fired = false;
  /// Highest-margin subset that fired (empty when nothing fired).
  Subset witness;
  /// max over searched S of N_S d+(mu_S, level) - 3 ln(1 + ln N_S) - T(...); -inf if nothing searched.
  double margin = 0.0;
};

/// Looks for a subset whose pooled mean is significantly below `level`.
/// Nested search walks prefixes of the arms with empirical mean <= level,
/// sorted by increasing mean (lowest index first on ties).
SubsetEvidence search_low_subsets(const RunState& state, const SubsetThresholds& thresholds, double level,
                                  SubsetSearch mode);

enum class ConfidenceSide { MinUpper, MaxLower };

/// Upper confidence bound on the smallest mean (MinUpper) or lower confidence
/// bound on the largest mean (MaxLower), valid uniformly over time with
/// probability 1 - delta. Computed as the extreme of the per-subset
/// divergence inversions over the searched family, which equals the largest
/// (smallest) q keeping every searched pooled statistic under its threshold.
double ucb_min(const RunState& state, const SubsetThresholds& thresholds, ConfidenceSide side,
               SubsetSearch mode = SubsetSearch::Nested);
double ucb_min(const RunState& state, const SubsetPrior& prior, double delta, ConfidenceSide side,
               SubsetSearch mode = SubsetSearch::Nested);

/// Per-arm box bound: invert_divergence with budget 3 ln(1 + ln N_a) + T(budget_arg).
double box_bound(const RunState& state, std::size_t arm, double budget_arg, Bound bound);

}  // namespace minmean
