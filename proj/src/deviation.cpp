#include "minmean/deviation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "minmean/error.hpp"

namespace minmean {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_choose(std::size_t n, std::size_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

double lil_term(double pooled_count) { return 3.0 * std::log1p(std::log(pooled_count)); }

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("delta must lie in (0, 1)");
}

// Arms sorted by empirical mean (ascending, or descending), lowest index first on ties.
std::vector<std::size_t> arms_by_mean(const RunState& state, bool ascending) {
  std::vector<std::size_t> order(state.arm_count());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> means(order.size());
  for (auto a : order) means[a] = state.mean(a);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return ascending ? means[x] < means[y] : means[x] > means[y];
  });
  return order;
}

void require_initialized(const RunState& state) {
  if (!state.initialized()) throw ArgumentError("every arm must be observed at least once");
}

// Calls visit(subset, pooled_count, pooled_sum, budget) for every candidate subset.
template <class Visit>
void for_each_candidate(const RunState& state, const SubsetThresholds& thresholds, SubsetSearch mode,
                        const std::vector<std::size_t>& nested_order, Visit&& visit) {
  const auto& prior = thresholds.prior();
  const std::size_t k = state.arm_count();
  Subset scratch;

  if (prior.kind() == SubsetPrior::Kind::Custom) {
    for (const auto& [subset, w] : prior.entries()) {
      double n = 0.0, s = 0.0;
      for (auto a : subset) {
        n += static_cast<double>(state.count(a));
        s += state.sum(a);
      }
      visit(subset, n, s, thresholds.budget(subset));
    }
    return;
  }

  if (prior.kind() == SubsetPrior::Kind::Singletons) {
    scratch.resize(1);
    for (auto a : nested_order) {
      scratch[0] = a;
      visit(scratch, static_cast<double>(state.count(a)), state.sum(a), thresholds.budget(scratch));
    }
    return;
  }

  if (mode == SubsetSearch::Nested) {
    double n = 0.0, s = 0.0;
    for (auto a : nested_order) {
      scratch.push_back(a);
      n += static_cast<double>(state.count(a));
      s += state.sum(a);
      visit(scratch, n, s, thresholds.budget(scratch));
    }
    return;
  }

  if (k > kMaxExhaustiveArms) {
    throw ArgumentError("exhaustive subset search supports at most " + std::to_string(kMaxExhaustiveArms) + " arms");
  }
  for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
    scratch.clear();
    double n = 0.0, s = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      if (mask & (1u << a)) {
        scratch.push_back(a);
        n += static_cast<double>(state.count(a));
        s += state.sum(a);
      }
    }
    visit(scratch, n, s, thresholds.budget(scratch));
  }
}

}  // namespace

double h(double u) {
  if (!(u >= 1.0)) throw DomainError("h: argument must be >= 1");
  return u - std::log(u);
}

double h_inverse(double x) {
  if (!(x >= 1.0)) throw DomainError("h_inverse: argument must be >= 1");
  if (x == 1.0) return 1.0;
  if (!std::isfinite(x)) return x;
  // Newton on f(e) = e - log1p(e) - (x - 1) with u = 1 + e; f is convex and
  // increasing, so iterates started above the root decrease monotonically.
  const double excess = x - 1.0;
  double e = excess + std::log(x + std::sqrt(2.0 * excess));
  for (int iter = 0; iter < 50; ++iter) {
    const double f = e - std::log1p(e) - excess;
    const double slope = e / (1.0 + e);
    const double step = f / slope;
    e -= step;
    if (std::abs(step) <= 1e-12 * (1.0 + e)) break;
  }
  return 1.0 + e;
}

double threshold_T(double x) {
  if (!(x >= kMinThresholdArg)) {
    throw DomainError("threshold_T: argument " + std::to_string(x) + " is below 0.04");
  }
  const double inner = h_inverse(1.0 + x);
  return 2.0 * h_inverse(1.0 + 0.5 * (inner + std::log(kZeta2)));
}

double stopping_threshold(double pooled_count, double budget_arg) {
  if (!(pooled_count >= 1.0)) throw ArgumentError("stopping_threshold: pooled count must be >= 1");
  return lil_term(pooled_count) + threshold_T(budget_arg);
}

// ---------------------------------------------------------------------------

SubsetPrior SubsetPrior::singletons(std::size_t arms) {
  if (arms == 0) throw ArgumentError("subset prior needs at least one arm");
  return SubsetPrior(Kind::Singletons, arms);
}

SubsetPrior SubsetPrior::size_uniform(std::size_t arms) {
  if (arms == 0) throw ArgumentError("subset prior needs at least one arm");
  return SubsetPrior(Kind::SizeUniform, arms);
}

SubsetPrior SubsetPrior::custom(std::size_t arms, std::vector<Entry> entries) {
  if (arms == 0) throw ArgumentError("subset prior needs at least one arm");
  if (entries.empty()) throw ArgumentError("custom subset prior has empty support");
  double total = 0.0;
  for (auto& [subset, w] : entries) {
    if (subset.empty()) throw ArgumentError("custom subset prior contains the empty set");
    if (!(w > 0.0)) throw ArgumentError("custom subset prior weights must be positive");
    std::sort(subset.begin(), subset.end());
    if (std::adjacent_find(subset.begin(), subset.end()) != subset.end()) {
      throw ArgumentError("custom subset prior subset repeats an arm");
    }
    if (subset.back() >= arms) throw ArgumentError("custom subset prior refers to a missing arm");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ArgumentError("custom subset prior weights must sum to 1");
  std::sort(entries.begin(), entries.end());
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].first == entries[i - 1].first) throw ArgumentError("custom subset prior lists a subset twice");
  }
  SubsetPrior prior(Kind::Custom, arms);
  prior.entries_ = std::move(entries);
  return prior;
}

double SubsetPrior::log_inverse_weight_for_size(std::size_t size) const {
  if (size == 0 || size > arms_) return kInf;
  switch (kind_) {
    case Kind::Singletons:
      return size == 1 ? std::log(static_cast<double>(arms_)) : kInf;
    case Kind::SizeUniform:
      return std::log(static_cast<double>(arms_)) + log_choose(arms_, size);
    case Kind::Custom:
      break;
  }
  throw ArgumentError("custom subset prior weights are not determined by subset size");
}

double SubsetPrior::weight(std::span<const std::size_t> subset) const {
  if (kind_ != Kind::Custom) return std::exp(-log_inverse_weight_for_size(subset.size()));
  Subset key(subset.begin(), subset.end());
  std::sort(key.begin(), key.end());
  for (const auto& [s, w] : entries_) {
    if (s == key) return w;
  }
  return 0.0;
}

SubsetThresholds::SubsetThresholds(SubsetPrior prior, double delta) : prior_(std::move(prior)), delta_(delta) {
  check_delta(delta);
  const double base = -std::log(delta);
  if (prior_.kind() == SubsetPrior::Kind::Custom) {
    for (const auto& [subset, w] : prior_.entries()) by_entry_.push_back(threshold_T(base - std::log(w)));
    return;
  }
  by_size_.assign(prior_.arm_count() + 1, kInf);
  for (std::size_t k = 1; k <= prior_.arm_count(); ++k) {
    const double extra = prior_.log_inverse_weight_for_size(k);
    if (std::isfinite(extra)) by_size_[k] = threshold_T(base + extra);
  }
}

double SubsetThresholds::budget(std::span<const std::size_t> subset) const {
  if (prior_.kind() != SubsetPrior::Kind::Custom) {
    return subset.size() < by_size_.size() ? by_size_[subset.size()] : kInf;
  }
  Subset key(subset.begin(), subset.end());
  std::sort(key.begin(), key.end());
  const auto& entries = prior_.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].first == key) return by_entry_[i];
  }
  return kInf;
}

AggregateStat aggregate_stat(const RunState& state, std::span<const std::size_t> subset) {
  if (subset.empty()) throw ArgumentError("aggregate_stat: empty subset");
  AggregateStat out;
  double total = 0.0;
  for (auto a : subset) {
    if (a >= state.arm_count()) throw ArgumentError("aggregate_stat: arm index out of range");
    if (state.count(a) < 1) throw ArgumentError("aggregate_stat: arm " + std::to_string(a + 1) + " unobserved");
    out.pooled_count += static_cast<double>(state.count(a));
    total += state.sum(a);
  }
  out.subset.assign(subset.begin(), subset.end());
  out.pooled_mean = total / out.pooled_count;
  return out;
}

SubsetEvidence search_low_subsets(const RunState& state, const SubsetThresholds& thresholds, double level,
                                  SubsetSearch mode) {
  require_initialized(state);
  if (thresholds.prior().arm_count() != state.arm_count()) {
    throw ArgumentError("subset prior and run state disagree on the number of arms");
  }
  std::vector<std::size_t> order;
  if (thresholds.prior().kind() != SubsetPrior::Kind::Custom) {
    for (auto a : arms_by_mean(state, true)) {
      if (state.mean(a) <= level) order.push_back(a);
    }
  }
  SubsetEvidence out;
  out.margin = -kInf;
  const FamilyModel family = state.family();
  for_each_candidate(state, thresholds, mode, order, [&](const Subset& subset, double n, double s, double budget) {
    if (!std::isfinite(budget)) return;
    const double mean = s / n;
    const double stat = n * divergence_directed(family, mean, level, DivergenceSide::Plus);
    const double margin = stat - lil_term(n) - budget;
    if (margin > out.margin) {
      out.margin = margin;
      if (margin >= 0.0) {
        out.fired = true;
        out.witness = subset;
      }
    }
  });
  return out;
}

double ucb_min(const RunState& state, const SubsetThresholds& thresholds, ConfidenceSide side, SubsetSearch mode) {
  require_initialized(state);
  if (thresholds.prior().arm_count() != state.arm_count()) {
    throw ArgumentError("subset prior and run state disagree on the number of arms");
  }
  const bool upper = side == ConfidenceSide::MinUpper;
  const auto order = arms_by_mean(state, upper);
  const FamilyModel family = state.family();
  double best = upper ? kInf : -kInf;
  for_each_candidate(state, thresholds, mode, order, [&](const Subset&, double n, double s, double budget) {
    if (!std::isfinite(budget)) return;
    const double q = invert_divergence(family, s / n, n, lil_term(n) + budget, upper ? Bound::Upper : Bound::Lower);
    best = upper ? std::min(best, q) : std::max(best, q);
  });
  return best;
}

double ucb_min(const RunState& state, const SubsetPrior& prior, double delta, ConfidenceSide side,
               SubsetSearch mode) {
  return ucb_min(state, SubsetThresholds(prior, delta), side, mode);
}

double box_bound(const RunState& state, std::size_t arm, double budget_arg, Bound bound) {
  const double n = static_cast<double>(state.count(arm));
  return invert_divergence(state.family(), state.mean(arm), n, stopping_threshold(n, budget_arg), bound);
}

}  // namespace minmean
