#pragma once
//
// Experiment configuration, Monte Carlo execution and report output.
//
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "minmean/oracle.hpp"
#include "minmean/rules.hpp"

namespace minmean {

struct RulePair {
  SamplingRule sampling = SamplingRule::Murphy;
  StoppingKind stopping = StoppingKind::Aggregate;
};

struct ExperimentConfig {
  BanditInstance instance;
  /// Means as written in the config file, echoed into reports.
  std::string means_spec;
  std::vector<RulePair> rules;
  std::vector<double> deltas;
  std::int64_t replications = 500;
  std::uint64_t master_seed = 1;
  std::int64_t horizon_cap = 10'000'000;
  std::int64_t murphy_rejection_cap = 100'000;
  SubsetSearch subset_search = SubsetSearch::Nested;
  std::optional<PriorParams> prior;
  std::string output_dir = ".";
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 0;

  /// Throws ConfigError if replications < 1, a delta leaves (0,1), the
  /// instance is invalid or has its minimum exactly on gamma, or a rule
  /// cannot be built for some delta.
  void validate() const;
  RuleConfig rule_config(const RulePair& rule, double delta) const;
};

/// Parses a YAML mapping with keys family, means, gamma, rules, deltas,
/// replications, master_seed, horizon_cap, murphy_rejection_cap,
/// subset_search, prior, output_dir, threads. Validates the result.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Expands a means specification: a number, "linspace(lo, hi, K)" or "repeat(value, n)".
std::vector<double> expand_means_item(std::string_view text);

/// Seed of one replication; depends only on its grid coordinates.
std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t rule_index, std::size_t delta_index,
                               std::int64_t replication);

struct SummaryRecord {
  SamplingRule sampling = SamplingRule::Murphy;
  StoppingKind stopping = StoppingKind::Aggregate;
  double delta = 0.0;
  std::int64_t reps = 0;
  std::uint64_t seed = 0;
  /// Over conclusive runs (all runs when none concluded).
  double mean_tau = 0.0;
  double se_tau = 0.0;
  /// Wrong recommendations among conclusive runs.
  double error_rate = 0.0;
  double inconclusive_rate = 0.0;
  std::vector<double> proportions;
  std::vector<double> mean_counts;
  /// Average size of the witness subset over runs stopped by tau_<.
  double mean_witness_size = 0.0;
  std::int64_t errors = 0;
  std::int64_t inconclusive = 0;
};

struct ExperimentSummary {
  ExperimentConfig config;
  std::vector<SummaryRecord> records;
};

/// Runs every (rule, delta, replication) cell. Replications are scheduled on
/// `config.threads` workers; the result does not depend on the schedule.
ExperimentSummary run_monte_carlo(const ExperimentConfig& config);

struct BoundsReport {
  double delta = 0.0;
  OracleSolution oracle;
  double generic_lower_bound = 0.0;
  std::optional<double> boosted_lower_bound;
  double min_draws_bound = 0.0;
};

BoundsReport summarize_bounds(const BanditInstance& instance, double delta);

enum class OutputFormat { Csv, Json };

void write_csv(const ExperimentSummary& summary, std::ostream& out);
nlohmann::json to_json(const ExperimentSummary& summary);
nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json to_json(const BoundsReport& report);
/// Rebuilds the summary records from to_json output.
std::vector<SummaryRecord> records_from_json(const nlohmann::json& doc);

/// Writes the summary to `path`; throws IoError naming the path on failure.
void emit_outputs(const ExperimentSummary& summary, OutputFormat format, const std::filesystem::path& path);

/// Samples the instance round-robin for `rounds` observations and writes one
/// CSV row per round from t = K on: t, arm, observation, the box and
/// aggregate upper bounds on the minimum, and every per-arm box bound.
void write_ci_trace(const ExperimentConfig& config, std::int64_t rounds, std::ostream& out);

}  // namespace minmean
