#include "minmean/rules.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "minmean/error.hpp"

namespace minmean {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Below this conditioning probability the Auto mode stops redrawing literally.
constexpr double kLiteralRejectionFloor = 0.05;

std::string upper_case(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
  return out;
}

double lil_term(double n) { return 3.0 * std::log1p(std::log(n)); }

std::size_t argmin_lowest(const std::vector<double>& values) {
  return static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
}

void require_initialized(const RunState& state) {
  if (!state.initialized()) throw ArgumentError("every arm must be observed at least once");
}

std::size_t lcb_argmin(const RunState& state, double budget_T) {
  std::size_t best = 0;
  double best_bound = kInf;
  for (std::size_t a = 0; a < state.arm_count(); ++a) {
    const double n = static_cast<double>(state.count(a));
    const double bound = invert_divergence(state.family(), state.mean(a), n, lil_term(n) + budget_T, Bound::Lower);
    if (bound < best_bound) {
      best_bound = bound;
      best = a;
    }
  }
  return best;
}

std::size_t murphy_fallback(const RunState& state, const std::vector<ArmPosterior>& posts,
                            const std::vector<double>& below, Rng& rng) {
  double total = 0.0;
  for (double p : below) total += p;
  if (total > 0.0) {
    std::discrete_distribution<std::size_t> pick(below.begin(), below.end());
    return pick(rng);
  }
  // Every mass underflowed: weight by the large-deviation rate exp(-N_a d(m_a, gamma)).
  std::vector<double> log_w(posts.size());
  for (std::size_t a = 0; a < posts.size(); ++a) {
    const double m = posts[a].mean();
    log_w[a] = m < state.gamma() ? 0.0 : -static_cast<double>(posts[a].count) * divergence(state.family(), m, state.gamma());
  }
  const double top = *std::max_element(log_w.begin(), log_w.end());
  for (auto& w : log_w) w = std::exp(w - top);
  std::discrete_distribution<std::size_t> pick(log_w.begin(), log_w.end());
  return pick(rng);
}

}  // namespace

std::string_view to_string(SamplingRule rule) {
  switch (rule) {
    case SamplingRule::LCB:
      return "LCB";
    case SamplingRule::Thompson:
      return "TS";
    case SamplingRule::Murphy:
      return "MS";
    case SamplingRule::RoundRobin:
      return "RR";
  }
  return "?";
}

std::string_view to_string(StoppingKind kind) {
  switch (kind) {
    case StoppingKind::Box:
      return "Box";
    case StoppingKind::Aggregate:
      return "Agg";
    case StoppingKind::GLRT:
      return "GLRT";
  }
  return "?";
}

std::string_view to_string(Recommendation rec) {
  switch (rec) {
    case Recommendation::Below:
      return "below";
    case Recommendation::Above:
      return "above";
    case Recommendation::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

std::string_view to_string(FiredClause clause) {
  switch (clause) {
    case FiredClause::TauLess:
      return "tau_less";
    case FiredClause::TauGreater:
      return "tau_greater";
    case FiredClause::Horizon:
      return "horizon";
  }
  return "?";
}

SamplingRule parse_sampling_rule(std::string_view text) {
  const auto key = upper_case(text);
  if (key == "LCB") return SamplingRule::LCB;
  if (key == "TS" || key == "THOMPSON") return SamplingRule::Thompson;
  if (key == "MS" || key == "MURPHY") return SamplingRule::Murphy;
  if (key == "RR" || key == "ROUNDROBIN" || key == "UNIFORM") return SamplingRule::RoundRobin;
  throw ConfigError("unknown sampling rule '" + std::string(text) + "'");
}

StoppingKind parse_stopping_kind(std::string_view text) {
  const auto key = upper_case(text);
  if (key == "BOX") return StoppingKind::Box;
  if (key == "AGG" || key == "AGGREGATE") return StoppingKind::Aggregate;
  if (key == "GLRT") return StoppingKind::GLRT;
  throw ConfigError("unknown stopping rule '" + std::string(text) + "'");
}

void RuleConfig::validate(std::size_t arms) const {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1), got " + std::to_string(delta));
  if (-std::log(delta) < kMinThresholdArg) throw ConfigError("delta too large: ln(1/delta) must be >= 0.04");
  if (horizon_cap < static_cast<std::int64_t>(arms)) throw ConfigError("horizon_cap must be at least the arm count");
  if (murphy_rejection_cap < 1) throw ConfigError("murphy_rejection_cap must be positive");
  if (stopping == StoppingKind::GLRT && -std::log(delta) / static_cast<double>(arms) < kMinThresholdArg) {
    throw ConfigError("GLRT needs ln(1/delta)/K >= 0.04");
  }
  if (subset_search == SubsetSearch::Exhaustive && arms > kMaxExhaustiveArms) {
    throw ConfigError("exhaustive subset search supports at most 12 arms");
  }
}

// --- sampling ---------------------------------------------------------------

std::size_t select_lcb(const RunState& state, double delta) {
  require_initialized(state);
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("delta must lie in (0, 1)");
  return lcb_argmin(state, threshold_T(-std::log(delta)));
}

std::size_t select_thompson(const RunState& state, PriorParams prior, Rng& rng) {
  std::vector<double> theta(state.arm_count());
  for (std::size_t a = 0; a < theta.size(); ++a) theta[a] = posterior_sample(state.posterior(a, prior), rng);
  return argmin_lowest(theta);
}

std::size_t select_thompson(const RunState& state, Rng& rng) {
  return select_thompson(state, default_prior(state.family()), rng);
}

std::size_t select_round_robin(const RunState& state) {
  const auto counts = state.counts();
  return static_cast<std::size_t>(std::min_element(counts.begin(), counts.end()) - counts.begin());
}

MurphyDraw murphy_draw(const RunState& state, PriorParams prior, Rng& rng, std::int64_t rejection_cap,
                       MurphyMode mode) {
  const std::size_t k = state.arm_count();
  const double gamma = state.gamma();
  std::vector<ArmPosterior> posts;
  posts.reserve(k);
  std::vector<double> below(k), above(k);
  double log_none_below = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    posts.push_back(state.posterior(a, prior));
    below[a] = posterior_prob_below(posts[a], gamma);
    above[a] = posterior_prob_above(posts[a], gamma);
    log_none_below += std::log(above[a]);
  }
  // Posterior probability of the conditioning event {min theta < gamma}.
  const double p_event = -std::expm1(log_none_below);

  MurphyDraw out;
  if (mode == MurphyMode::Auto) mode = p_event >= kLiteralRejectionFloor ? MurphyMode::Rejection : MurphyMode::Exact;

  if (mode == MurphyMode::Rejection) {
    std::vector<double> theta(k);
    for (std::int64_t attempt = 0; attempt < rejection_cap; ++attempt) {
      for (std::size_t a = 0; a < k; ++a) theta[a] = posterior_sample(posts[a], rng);
      const std::size_t arm = argmin_lowest(theta);
      if (theta[arm] < gamma) {
        out.arm = arm;
        out.theta = std::move(theta);
        return out;
      }
    }
  } else if (p_event > 0.0) {
    // All `rejection_cap` attempts fail with probability (1 - p_event)^cap.
    const double exhaust = std::exp(static_cast<double>(rejection_cap) * std::log1p(-p_event));
    if (std::generate_canonical<double, 53>(rng) >= exhaust) {
      // Index of the first arm whose draw falls below gamma:
      // P(j) = below_j prod_{i<j} above_i / p_event.
      double target = std::generate_canonical<double, 53>(rng) * p_event;
      double survive = 1.0;
      std::size_t first = k - 1;
      for (std::size_t j = 0; j < k; ++j) {
        const double mass = survive * below[j];
        if (target < mass) {
          first = j;
          break;
        }
        target -= mass;
        survive *= above[j];
      }
      while (below[first] <= 0.0 && first > 0) --first;  // rounding guard
      std::vector<double> theta(k);
      for (std::size_t a = 0; a < k; ++a) {
        if (a < first) {
          theta[a] = posterior_sample_truncated(posts[a], gamma, Tail::Above, rng);
        } else if (a == first) {
          theta[a] = posterior_sample_truncated(posts[a], gamma, Tail::Below, rng);
        } else {
          theta[a] = posterior_sample(posts[a], rng);
        }
      }
      out.arm = argmin_lowest(theta);
      out.theta = std::move(theta);
      return out;
    }
  }
  out.fallback = true;
  out.arm = murphy_fallback(state, posts, below, rng);
  return out;
}

std::size_t select_murphy(const RunState& state, Rng& rng, std::int64_t rejection_cap) {
  return murphy_draw(state, default_prior(state.family()), rng, rejection_cap).arm;
}

// --- stopping ---------------------------------------------------------------

StoppingRule::StoppingRule(StoppingKind kind, double delta, std::size_t arms, SubsetSearch search)
    : kind_(kind), delta_(delta), arms_(arms), search_(search) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (arms == 0) throw ConfigError("stopping rule needs at least one arm");
  const double log_inv = -std::log(delta);
  if (log_inv < kMinThresholdArg) throw ConfigError("delta too large: ln(1/delta) must be >= 0.04");
  greater_budget_ = threshold_T(log_inv);
  switch (kind) {
    case StoppingKind::Box:
      subsets_.emplace(SubsetPrior::singletons(arms), delta);
      break;
    case StoppingKind::Aggregate:
      subsets_.emplace(SubsetPrior::size_uniform(arms), delta);
      break;
    case StoppingKind::GLRT: {
      const double per_arm = log_inv / static_cast<double>(arms);
      if (per_arm < kMinThresholdArg) throw ConfigError("GLRT needs ln(1/delta)/K >= 0.04");
      glrt_threshold_ = static_cast<double>(arms) * threshold_T(per_arm);
      break;
    }
  }
}

void StoppingRule::probe_greater(const RunState& state, StopProbe& out) const {
  double margin = kInf;
  for (std::size_t a = 0; a < state.arm_count(); ++a) {
    const double n = static_cast<double>(state.count(a));
    const double stat = n * divergence_directed(state.family(), state.mean(a), state.gamma(), DivergenceSide::Minus);
    margin = std::min(margin, stat - lil_term(n) - greater_budget_);
  }
  out.greater_margin = margin;
  out.greater = margin >= 0.0;
}

void StoppingRule::probe_less(const RunState& state, StopProbe& out) const {
  out.witness.clear();
  if (kind_ != StoppingKind::GLRT) {
    auto evidence = search_low_subsets(state, *subsets_, state.gamma(), search_);
    out.less = evidence.fired;
    out.less_margin = evidence.margin;
    out.witness = std::move(evidence.witness);
    return;
  }
  double total = 0.0;
  Subset support;
  for (std::size_t a = 0; a < state.arm_count(); ++a) {
    const double mean = state.mean(a);
    if (mean > state.gamma()) continue;
    const double n = static_cast<double>(state.count(a));
    const double stat = n * divergence_directed(state.family(), mean, state.gamma(), DivergenceSide::Plus);
    total += std::max(0.0, stat - lil_term(n));
    support.push_back(a);
  }
  out.less_margin = total - glrt_threshold_;
  out.less = out.less_margin >= 0.0;
  if (out.less) out.witness = std::move(support);
}

StopProbe StoppingRule::evaluate(const RunState& state) const {
  require_initialized(state);
  if (state.arm_count() != arms_) throw ArgumentError("stopping rule and run state disagree on the number of arms");
  StopProbe out;
  probe_greater(state, out);
  probe_less(state, out);
  return out;
}

bool check_stop_greater(const RunState& state, double delta) {
  require_initialized(state);
  StopProbe probe;
  StoppingRule(StoppingKind::Box, delta, state.arm_count()).probe_greater(state, probe);
  return probe.greater;
}

StopLess check_stop_less(const RunState& state, double delta, StoppingKind kind, SubsetSearch search) {
  require_initialized(state);
  StopProbe probe;
  StoppingRule(kind, delta, state.arm_count(), search).probe_less(state, probe);
  StopLess out;
  out.fired = probe.less;
  if (probe.less) out.witness = std::move(probe.witness);
  return out;
}

// --- episode ----------------------------------------------------------------

EpisodeResult run_episode(const BanditInstance& instance, const RuleConfig& config, Rng& rng, bool record_trace) {
  instance.validate();
  const std::size_t k = instance.arm_count();
  config.validate(k);
  const PriorParams prior = config.prior.value_or(default_prior(instance.family));
  const StoppingRule stopping(config.stopping, config.delta, k, config.subset_search);
  const double lcb_budget = threshold_T(-std::log(config.delta));
  const double nan = std::numeric_limits<double>::quiet_NaN();

  RunState state(instance.family, k, instance.gamma);
  EpisodeResult result;
  auto observe = [&](std::size_t arm) {
    const double x = draw_observation(instance.family, instance.means[arm], rng);
    state.record(arm, x);
    if (record_trace) {
      result.trace.push_back({state.round(), arm, x, {state.counts().begin(), state.counts().end()}, nan, nan});
    }
  };

  for (std::size_t a = 0; a < k; ++a) observe(a);

  for (;;) {
    const StopProbe probe = stopping.evaluate(state);
    if (record_trace) {
      result.trace.back().greater_margin = probe.greater_margin;
      result.trace.back().less_margin = probe.less_margin;
    }
    Verdict& v = result.verdict;
    v.stopped_at = state.round();
    if (probe.greater) {
      v.recommendation = Recommendation::Above;
      v.fired_clause = FiredClause::TauGreater;
      break;
    }
    if (probe.less) {
      v.recommendation = Recommendation::Below;
      v.fired_clause = FiredClause::TauLess;
      v.witness = probe.witness;
      break;
    }
    if (state.round() >= config.horizon_cap) {
      v.recommendation = Recommendation::Inconclusive;
      v.fired_clause = FiredClause::Horizon;
      break;
    }
    std::size_t arm = 0;
    switch (config.sampling) {
      case SamplingRule::LCB:
        arm = lcb_argmin(state, lcb_budget);
        break;
      case SamplingRule::Thompson:
        arm = select_thompson(state, prior, rng);
        break;
      case SamplingRule::Murphy:
        arm = murphy_draw(state, prior, rng, config.murphy_rejection_cap).arm;
        break;
      case SamplingRule::RoundRobin:
        arm = select_round_robin(state);
        break;
    }
    observe(arm);
  }
  result.counts.assign(state.counts().begin(), state.counts().end());
  return result;
}

}  // namespace minmean
