#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "minmean/error.hpp"
#include "minmean/harness.hpp"

namespace {

using namespace minmean;

void print_table(const ExperimentSummary& summary) {
  std::printf("%-4s %-5s %10s %12s %10s %9s %9s\n", "rule", "stop", "delta", "mean_tau", "se_tau", "error",
              "inconcl");
  for (const auto& r : summary.records) {
    std::printf("%-4s %-5s %10.3g %12.2f %10.2f %9.4f %9.4f\n", std::string(to_string(r.sampling)).c_str(),
                std::string(to_string(r.stopping)).c_str(), r.delta, r.mean_tau, r.se_tau, r.error_rate,
                r.inconclusive_rate);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential tests for the minimum mean of a multi-armed bandit"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::int64_t> reps;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<unsigned> threads;
  auto* run = app.add_subcommand("run", "Monte Carlo over the rule x delta grid");
  run->add_option("--config", config_path, "YAML experiment file")->required();
  run->add_option("--reps", reps, "Replications per cell");
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--out", out_dir, "Output directory for summary.csv and summary.json");
  run->add_option("--threads", threads, "Worker threads (0 = all cores)");

  auto* bounds = app.add_subcommand("bounds", "Oracle weights and lower bounds for each delta");
  bounds->add_option("--config", config_path, "YAML experiment file")->required();

  std::int64_t rounds = 0;
  std::optional<std::string> trace_out;
  auto* trace = app.add_subcommand("ci-trace", "Round-robin trace of box and aggregate bounds");
  trace->add_option("--config", config_path, "YAML experiment file")->required();
  trace->add_option("--rounds", rounds, "Number of observations")->required();
  trace->add_option("--out", trace_out, "CSV file (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg = load_config(config_path);
    if (*run) {
      if (reps) cfg.replications = *reps;
      if (seed) cfg.master_seed = *seed;
      if (out_dir) cfg.output_dir = *out_dir;
      if (threads) cfg.threads = *threads;
      const auto summary = run_monte_carlo(cfg);
      const std::filesystem::path dir = cfg.output_dir;
      emit_outputs(summary, OutputFormat::Csv, dir / "summary.csv");
      emit_outputs(summary, OutputFormat::Json, dir / "summary.json");
      print_table(summary);
    } else if (*bounds) {
      nlohmann::json doc = nlohmann::json::array();
      for (double d : cfg.deltas) doc.push_back(to_json(summarize_bounds(cfg.instance, d)));
      std::cout << doc.dump(2) << '\n';
    } else if (*trace) {
      if (trace_out) {
        std::ofstream out(*trace_out);
        if (!out) throw IoError("cannot open " + *trace_out + " for writing");
        write_ci_trace(cfg, rounds, out);
      } else {
        write_ci_trace(cfg, rounds, std::cout);
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
