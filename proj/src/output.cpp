#include <charconv>
#include <fstream>
#include <ostream>
#include <string>

#include "minmean/error.hpp"
#include "minmean/harness.hpp"

namespace minmean {
namespace {

// Shortest representation that parses back to the same double.
std::string num(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string_view side_name(Hypothesis h) { return h == Hypothesis::Below ? "below" : "above"; }

}  // namespace

void write_csv(const ExperimentSummary& summary, std::ostream& out) {
  const std::size_t k = summary.config.instance.arm_count();
  out << "sampling,stopping,delta,mean_tau,se_tau,error_rate,inconclusive_rate";
  for (std::size_t a = 1; a <= k; ++a) out << ",prop_" << a;
  out << ",mean_witness_size,reps,seed\n";
  for (const auto& r : summary.records) {
    out << to_string(r.sampling) << ',' << to_string(r.stopping) << ',' << num(r.delta) << ',' << num(r.mean_tau)
        << ',' << num(r.se_tau) << ',' << num(r.error_rate) << ',' << num(r.inconclusive_rate);
    for (double p : r.proportions) out << ',' << num(p);
    out << ',' << num(r.mean_witness_size) << ',' << r.reps << ',' << r.seed << '\n';
  }
}

nlohmann::json to_json(const ExperimentConfig& config) {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : config.rules) {
    rules.push_back({{"sampling", to_string(r.sampling)}, {"stopping", to_string(r.stopping)}});
  }
  nlohmann::json doc = {
      {"family", config.instance.family.name()},
      {"means_spec", config.means_spec},
      {"means", config.instance.means},
      {"gamma", config.instance.gamma},
      {"rules", rules},
      {"deltas", config.deltas},
      {"replications", config.replications},
      {"master_seed", config.master_seed},
      {"horizon_cap", config.horizon_cap},
      {"murphy_rejection_cap", config.murphy_rejection_cap},
      {"subset_search", config.subset_search == SubsetSearch::Nested ? "nested" : "exhaustive"},
  };
  if (config.prior) doc["prior"] = {{"a", config.prior->a}, {"b", config.prior->b}};
  return doc;
}

nlohmann::json to_json(const BoundsReport& report) {
  nlohmann::json doc = {
      {"delta", report.delta},
      {"side", side_name(report.oracle.side)},
      {"characteristic_time", report.oracle.characteristic_time},
      {"weights", report.oracle.weights},
      {"minimizers", report.oracle.minimizers},
      {"generic_lower_bound", report.generic_lower_bound},
      {"min_draws_bound", report.min_draws_bound},
  };
  doc["boosted_lower_bound"] = report.boosted_lower_bound ? nlohmann::json(*report.boosted_lower_bound) : nullptr;
  return doc;
}

nlohmann::json to_json(const ExperimentSummary& summary) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : summary.records) {
    records.push_back({
        {"sampling", to_string(r.sampling)},
        {"stopping", to_string(r.stopping)},
        {"delta", r.delta},
        {"mean_tau", r.mean_tau},
        {"se_tau", r.se_tau},
        {"error_rate", r.error_rate},
        {"inconclusive_rate", r.inconclusive_rate},
        {"proportions", r.proportions},
        {"mean_counts", r.mean_counts},
        {"mean_witness_size", r.mean_witness_size},
        {"reps", r.reps},
        {"seed", r.seed},
        {"errors", r.errors},
        {"inconclusive", r.inconclusive},
        {"generic_lower_bound", generic_lower_bound(summary.config.instance, r.delta)},
    });
  }
  return {{"config", to_json(summary.config)}, {"records", records}};
}

std::vector<SummaryRecord> records_from_json(const nlohmann::json& doc) {
  std::vector<SummaryRecord> out;
  for (const auto& j : doc.at("records")) {
    SummaryRecord r;
    r.sampling = parse_sampling_rule(j.at("sampling").get<std::string>());
    r.stopping = parse_stopping_kind(j.at("stopping").get<std::string>());
    r.delta = j.at("delta").get<double>();
    r.mean_tau = j.at("mean_tau").get<double>();
    r.se_tau = j.at("se_tau").get<double>();
    r.error_rate = j.at("error_rate").get<double>();
    r.inconclusive_rate = j.at("inconclusive_rate").get<double>();
    r.proportions = j.at("proportions").get<std::vector<double>>();
    r.mean_counts = j.at("mean_counts").get<std::vector<double>>();
    r.mean_witness_size = j.at("mean_witness_size").get<double>();
    r.reps = j.at("reps").get<std::int64_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.errors = j.at("errors").get<std::int64_t>();
    r.inconclusive = j.at("inconclusive").get<std::int64_t>();
    out.push_back(std::move(r));
  }
  return out;
}

void emit_outputs(const ExperimentSummary& summary, OutputFormat format, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  if (format == OutputFormat::Csv) {
    write_csv(summary, out);
  } else {
    out << to_json(summary).dump(2) << '\n';
  }
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace minmean
