#pragma once
//
// Sampling rules, stopping rules and the single-episode driver.
//
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "minmean/deviation.hpp"
#include "minmean/expfam.hpp"
#include "minmean/oracle.hpp"
#include "minmean/run_state.hpp"

namespace minmean {

enum class SamplingRule { LCB, Thompson, Murphy, RoundRobin };
enum class StoppingKind { Box, Aggregate, GLRT };
enum class Recommendation { Below, Above, Inconclusive };
enum class FiredClause { TauLess, TauGreater, Horizon };

std::string_view to_string(SamplingRule rule);
std::string_view to_string(StoppingKind kind);
std::string_view to_string(Recommendation rec);
std::string_view to_string(FiredClause clause);
/// Accepts the short names used in configs: LCB, TS/Thompson, MS/Murphy, RR/RoundRobin.
SamplingRule parse_sampling_rule(std::string_view text);
/// Box, Agg/Aggregate, GLRT.
StoppingKind parse_stopping_kind(std::string_view text);

struct Verdict {
  std::int64_t stopped_at = 0;
  Recommendation recommendation = Recommendation::Inconclusive;
  FiredClause fired_clause = FiredClause::Horizon;
  std::optional<Subset> witness;
};

struct RuleConfig {
  SamplingRule sampling = SamplingRule::Murphy;
  StoppingKind stopping = StoppingKind::Aggregate;
  double delta = 0.05;
  std::int64_t horizon_cap = 10'000'000;
  std::int64_t murphy_rejection_cap = 100'000;
  SubsetSearch subset_search = SubsetSearch::Nested;
  /// Conjugate prior for TS/MS; the family default when unset.
  std::optional<PriorParams> prior;

  /// Throws ConfigError on delta outside (0,1), horizon_cap < arms, or a
  /// GLRT budget ln(1/delta)/K below 0.04.
  void validate(std::size_t arms) const;
};

/// Arm with the smallest lower confidence bound, built from the same
/// threshold family as the tau_> clause. Ties go to the lowest index.
std::size_t select_lcb(const RunState& state, double delta);

/// Vanilla Thompson sampling: argmin of one posterior draw per arm.
std::size_t select_thompson(const RunState& state, PriorParams prior, Rng& rng);
std::size_t select_thompson(const RunState& state, Rng& rng);

/// Plays the arm with the fewest draws (lowest index first).
std::size_t select_round_robin(const RunState& state);

enum class MurphyMode {
  /// Literal rejection when the conditioning event is likely, exact simulation otherwise.
  Auto,
  /// Redraw joint posterior vectors until one has a component below gamma.
  Rejection,
  /// Same law as Rejection: decide exhaustion of the cap from its exact
  /// probability, then draw the conditioned vector sequentially.
  Exact,
};

struct MurphyDraw {
  std::size_t arm = 0;
  /// Accepted posterior vector; empty when the fallback was used.
  std::vector<double> theta;
  bool fallback = false;
};

/// Thompson sampling from the joint posterior conditioned on {min theta < gamma}.
/// When `rejection_cap` draws would all be rejected, falls back to playing arm a
/// with probability proportional to its posterior mass below gamma.
MurphyDraw murphy_draw(const RunState& state, PriorParams prior, Rng& rng, std::int64_t rejection_cap,
                       MurphyMode mode = MurphyMode::Auto);
std::size_t select_murphy(const RunState& state, Rng& rng, std::int64_t rejection_cap = 100'000);

/// Probe values of both stopping clauses at one round.
struct StopProbe {
  bool greater = false;
  bool less = false;
  /// min_a [N_a d-(mu_a, gamma) - threshold]; >= 0 iff tau_> fires.
  double greater_margin = 0.0;
  /// Best evidence for tau_< minus its threshold; >= 0 iff it fires.
  double less_margin = 0.0;
  Subset witness;
};

/// Stopping rule with its thresholds evaluated once for (kind, delta, K).
class StoppingRule {
 public:
  StoppingRule(StoppingKind kind, double delta, std::size_t arms, SubsetSearch search = SubsetSearch::Nested);

  StoppingKind kind() const { return kind_; }
  StopProbe evaluate(const RunState& state) const;
  void probe_greater(const RunState& state, StopProbe& out) const;
  void probe_less(const RunState& state, StopProbe& out) const;

 private:
  StoppingKind kind_;
  double delta_;
  std::size_t arms_;
  SubsetSearch search_;
  double greater_budget_;
  double glrt_threshold_ = 0.0;
  std::optional<SubsetThresholds> subsets_;
};

/// tau_>: every arm's N_a d-(mu_a, gamma) clears 3 ln(1 + ln N_a) + T(ln(1/delta)).
bool check_stop_greater(const RunState& state, double delta);

struct StopLess {
  bool fired = false;
  std::optional<Subset> witness;
};

/// tau_< under the Box (singleton prior), Aggregate (size-uniform prior) or GLRT rule.
StopLess check_stop_less(const RunState& state, double delta, StoppingKind kind,
                         SubsetSearch search = SubsetSearch::Nested);

struct TraceRecord {
  std::int64_t t = 0;
  std::size_t arm = 0;
  double observation = 0.0;
  std::vector<std::int64_t> counts;
  /// Probe margins after this observation; NaN during initialization.
  double greater_margin = 0.0;
  double less_margin = 0.0;
};

struct EpisodeResult {
  Verdict verdict;
  std::vector<std::int64_t> counts;
  std::vector<TraceRecord> trace;
};

/// Draws every arm once in index order, then alternates stopping check, arm
/// selection and observation until a clause fires or horizon_cap is reached.
EpisodeResult run_episode(const BanditInstance& instance, const RuleConfig& config, Rng& rng,
                          bool record_trace = false);

}  // namespace minmean
