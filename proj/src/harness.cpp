#include "minmean/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

#include "minmean/error.hpp"

namespace minmean {
namespace {

struct RunOutcome {
  std::int64_t tau = 0;
  Recommendation recommendation = Recommendation::Inconclusive;
  std::vector<std::int64_t> counts;
  std::size_t witness_size = 0;
  bool has_witness = false;
};

SummaryRecord aggregate(const RulePair& rule, double delta, const ExperimentConfig& config, Hypothesis truth,
                        const std::vector<RunOutcome>& runs) {
  SummaryRecord rec;
  rec.sampling = rule.sampling;
  rec.stopping = rule.stopping;
  rec.delta = delta;
  rec.reps = static_cast<std::int64_t>(runs.size());
  rec.seed = config.master_seed;
  const std::size_t k = config.instance.arm_count();
  const Recommendation correct = truth == Hypothesis::Below ? Recommendation::Below : Recommendation::Above;

  std::int64_t witnessed = 0;
  double witness_total = 0.0;
  for (const auto& run : runs) {
    if (run.recommendation == Recommendation::Inconclusive) {
      ++rec.inconclusive;
    } else if (run.recommendation != correct) {
      ++rec.errors;
    }
    if (run.has_witness) {
      ++witnessed;
      witness_total += static_cast<double>(run.witness_size);
    }
  }
  const std::int64_t conclusive = rec.reps - rec.inconclusive;
  const bool use_all = conclusive == 0;
  const double m = static_cast<double>(use_all ? rec.reps : conclusive);

  rec.proportions.assign(k, 0.0);
  rec.mean_counts.assign(k, 0.0);
  double sum = 0.0;
  for (const auto& run : runs) {
    if (!use_all && run.recommendation == Recommendation::Inconclusive) continue;
    const double tau = static_cast<double>(run.tau);
    sum += tau;
    for (std::size_t a = 0; a < k; ++a) {
      rec.proportions[a] += static_cast<double>(run.counts[a]) / tau;
      rec.mean_counts[a] += static_cast<double>(run.counts[a]);
    }
  }
  rec.mean_tau = sum / m;
  double ss = 0.0;
  for (const auto& run : runs) {
    if (!use_all && run.recommendation == Recommendation::Inconclusive) continue;
    const double dev = static_cast<double>(run.tau) - rec.mean_tau;
    ss += dev * dev;
  }
  rec.se_tau = m > 1.0 ? std::sqrt(ss / (m - 1.0) / m) : 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    rec.proportions[a] /= m;
    rec.mean_counts[a] /= m;
  }
  rec.error_rate = conclusive > 0 ? static_cast<double>(rec.errors) / static_cast<double>(conclusive) : 0.0;
  rec.inconclusive_rate = static_cast<double>(rec.inconclusive) / static_cast<double>(rec.reps);
  rec.mean_witness_size = witnessed > 0 ? witness_total / static_cast<double>(witnessed) : 0.0;
  return rec;
}

}  // namespace

std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t rule_index, std::size_t delta_index,
                               std::int64_t replication) {
  const auto rep = static_cast<std::uint64_t>(replication);
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(rule_index),  static_cast<std::uint32_t>(delta_index),
                    static_cast<std::uint32_t>(rep),         static_cast<std::uint32_t>(rep >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

ExperimentSummary run_monte_carlo(const ExperimentConfig& config) {
  config.validate();
  const Hypothesis truth = config.instance.hypothesis();
  const std::size_t cells = config.rules.size() * config.deltas.size();
  const auto reps = static_cast<std::size_t>(config.replications);
  std::vector<std::vector<RunOutcome>> outcomes(cells, std::vector<RunOutcome>(reps));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= cells * reps) return;
      const std::size_t cell = job / reps;
      const std::size_t rep = job % reps;
      const std::size_t r = cell / config.deltas.size();
      const std::size_t d = cell % config.deltas.size();
      try {
        Rng rng(replication_seed(config.master_seed, r, d, static_cast<std::int64_t>(rep)));
        const auto result = run_episode(config.instance, config.rule_config(config.rules[r], config.deltas[d]), rng);
        RunOutcome& out = outcomes[cell][rep];
        out.tau = result.verdict.stopped_at;
        out.recommendation = result.verdict.recommendation;
        out.counts = result.counts;
        if (result.verdict.witness) {
          out.has_witness = true;
          out.witness_size = result.verdict.witness->size();
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(cells * reps);
        return;
      }
    }
  };

  unsigned threads = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, cells * reps)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentSummary summary{config, {}};
  for (std::size_t r = 0; r < config.rules.size(); ++r) {
    for (std::size_t d = 0; d < config.deltas.size(); ++d) {
      summary.records.push_back(
          aggregate(config.rules[r], config.deltas[d], config, truth, outcomes[r * config.deltas.size() + d]));
    }
  }
  return summary;
}

BoundsReport summarize_bounds(const BanditInstance& instance, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("delta must lie in (0, 1)");
  BoundsReport report;
  report.delta = delta;
  report.oracle = oracle_solution(instance);
  report.generic_lower_bound = generic_lower_bound(instance, delta);
  report.min_draws_bound = min_draws_bound(instance, delta);
  if (report.oracle.side == Hypothesis::Below) report.boosted_lower_bound = boosted_lower_bound(instance, delta);
  return report;
}

void write_ci_trace(const ExperimentConfig& config, std::int64_t rounds, std::ostream& out) {
  config.validate();
  if (config.deltas.empty()) throw ConfigError("ci-trace needs at least one delta");
  const std::size_t k = config.instance.arm_count();
  if (rounds < static_cast<std::int64_t>(k)) throw ConfigError("ci-trace needs at least K rounds");
  const double delta = config.deltas.front();
  const SubsetThresholds box(SubsetPrior::singletons(k), delta);
  const SubsetThresholds agg(SubsetPrior::size_uniform(k), delta);
  const double box_arg = std::log(static_cast<double>(k) / delta);

  Rng rng(replication_seed(config.master_seed, 0, 0, 0));
  RunState state(config.instance.family, k, config.instance.gamma);
  out << "t,arm,observation,ucb_box,ucb_agg";
  for (std::size_t a = 1; a <= k; ++a) out << ",box_" << a;
  out << '\n';
  out.precision(10);
  for (std::int64_t t = 1; t <= rounds; ++t) {
    const std::size_t arm = select_round_robin(state);
    const double x = draw_observation(config.instance.family, config.instance.means[arm], rng);
    state.record(arm, x);
    if (!state.initialized()) continue;
    out << t << ',' << arm + 1 << ',' << x << ',' << ucb_min(state, box, ConfidenceSide::MinUpper) << ','
        << ucb_min(state, agg, ConfidenceSide::MinUpper, config.subset_search);
    for (std::size_t a = 0; a < k; ++a) out << ',' << box_bound(state, a, box_arg, Bound::Upper);
    out << '\n';
  }
}

}  // namespace minmean
