#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <yaml-cpp/yaml.h>

#include "minmean/error.hpp"
#include "minmean/harness.hpp"

namespace minmean {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double parse_number(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ConfigError("cannot read " + std::string(what) + " from '" + s + "'");
  return value;
}

// Splits "name(a, b, c)" into its name and comma separated arguments.
std::pair<std::string, std::vector<std::string>> split_call(std::string_view text) {
  const std::string s = trim(text);
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')') return {s, {}};
  std::vector<std::string> args;
  std::stringstream inner(s.substr(open + 1, s.size() - open - 2));
  std::string piece;
  while (std::getline(inner, piece, ',')) args.push_back(trim(piece));
  return {trim(s.substr(0, open)), args};
}

std::int64_t as_count(std::string_view text, std::string_view what) {
  const double v = parse_number(text, what);
  if (v < 0 || v != std::floor(v)) throw ConfigError(std::string(what) + " must be a non-negative integer");
  return static_cast<std::int64_t>(v);
}

template <class T>
T scalar(const YAML::Node& node, std::string_view key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError("bad value for '" + std::string(key) + "': " + e.what());
  }
}

RulePair parse_rule(const YAML::Node& node) {
  if (node.IsMap()) {
    return {parse_sampling_rule(scalar<std::string>(node["sampling"], "sampling")),
            parse_stopping_kind(scalar<std::string>(node["stopping"], "stopping"))};
  }
  const auto text = scalar<std::string>(node, "rules");
  const auto slash = text.find_first_of("/:+");
  if (slash == std::string::npos) throw ConfigError("rule '" + text + "' must look like SAMPLING/STOPPING");
  return {parse_sampling_rule(trim(text.substr(0, slash))), parse_stopping_kind(trim(text.substr(slash + 1)))};
}

std::string describe(const YAML::Node& node) {
  YAML::Emitter emitter;
  emitter << YAML::Flow << node;
  return emitter.c_str();
}

}  // namespace

std::vector<double> expand_means_item(std::string_view text) {
  auto [name, args] = split_call(text);
  if (args.empty()) return {parse_number(name, "mean")};
  if (name == "linspace") {
    if (args.size() != 3) throw ConfigError("linspace takes (lo, hi, K)");
    const double lo = parse_number(args[0], "linspace lo");
    const double hi = parse_number(args[1], "linspace hi");
    const auto k = as_count(args[2], "linspace K");
    if (k < 1) throw ConfigError("linspace needs K >= 1");
    std::vector<double> out(static_cast<std::size_t>(k));
    for (std::int64_t i = 0; i < k; ++i) {
      out[i] = k == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(k - 1);
    }
    return out;
  }
  if (name == "repeat") {
    if (args.size() != 2) throw ConfigError("repeat takes (value, n)");
    return std::vector<double>(static_cast<std::size_t>(as_count(args[1], "repeat n")),
                               parse_number(args[0], "repeat value"));
  }
  throw ConfigError("unknown means generator '" + name + "'");
}

void ExperimentConfig::validate() const {
  try {
    instance.validate();
    (void)instance.hypothesis();
  } catch (const DegenerateInstanceError&) {
    throw ConfigError("instance is not classifiable: the minimum mean equals gamma");
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  if (replications < 1) throw ConfigError("replications must be >= 1");
  for (double d : deltas) {
    if (!(d > 0.0 && d < 1.0)) throw ConfigError("every delta must lie in (0, 1)");
  }
  for (const auto& rule : rules) {
    for (double d : deltas) rule_config(rule, d).validate(instance.arm_count());
  }
}

RuleConfig ExperimentConfig::rule_config(const RulePair& rule, double delta) const {
  RuleConfig rc;
  rc.sampling = rule.sampling;
  rc.stopping = rule.stopping;
  rc.delta = delta;
  rc.horizon_cap = horizon_cap;
  rc.murphy_rejection_cap = murphy_rejection_cap;
  rc.subset_search = subset_search;
  rc.prior = prior;
  return rc;
}

ExperimentConfig parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("config must be a key/value mapping");

  static const std::set<std::string> known = {
      "family", "means",        "gamma",          "rules", "deltas", "replications", "master_seed", "horizon_cap",
      "murphy_rejection_cap", "subset_search", "prior", "output_dir", "threads"};
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  for (const char* required : {"family", "means", "gamma"}) {
    if (!root[required]) throw ConfigError(std::string("config is missing '") + required + "'");
  }

  ExperimentConfig cfg;
  try {
    cfg.instance.family = parse_family(scalar<std::string>(root["family"], "family"));
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  const YAML::Node means = root["means"];
  cfg.means_spec = describe(means);
  if (means.IsSequence()) {
    // A flow sequence splits "linspace(-1, 1, 10)" at its commas; glue the pieces back.
    std::string pending;
    for (const auto& item : means) {
      pending += (pending.empty() ? "" : ",") + scalar<std::string>(item, "means");
      if (std::count(pending.begin(), pending.end(), '(') > std::count(pending.begin(), pending.end(), ')')) continue;
      for (double v : expand_means_item(pending)) cfg.instance.means.push_back(v);
      pending.clear();
    }
    if (!pending.empty()) throw ConfigError("unbalanced parentheses in means: '" + pending + "'");
  } else {
    cfg.instance.means = expand_means_item(scalar<std::string>(means, "means"));
  }
  cfg.instance.gamma = scalar<double>(root["gamma"], "gamma");

  if (const auto rules = root["rules"]) {
    if (rules.IsSequence()) {
      for (const auto& r : rules) cfg.rules.push_back(parse_rule(r));
    } else {
      cfg.rules.push_back(parse_rule(rules));
    }
  }
  if (const auto deltas = root["deltas"]) {
    if (deltas.IsSequence()) {
      for (const auto& d : deltas) cfg.deltas.push_back(scalar<double>(d, "deltas"));
    } else {
      cfg.deltas.push_back(scalar<double>(deltas, "deltas"));
    }
  } else {
    cfg.deltas = {0.1, 0.01, 1e-3, 1e-4};
  }
  if (const auto n = root["replications"]) cfg.replications = scalar<std::int64_t>(n, "replications");
  if (const auto n = root["master_seed"]) cfg.master_seed = scalar<std::uint64_t>(n, "master_seed");
  if (const auto n = root["horizon_cap"]) cfg.horizon_cap = scalar<std::int64_t>(n, "horizon_cap");
  if (const auto n = root["murphy_rejection_cap"]) {
    cfg.murphy_rejection_cap = scalar<std::int64_t>(n, "murphy_rejection_cap");
  }
  if (const auto n = root["subset_search"]) {
    const auto mode = scalar<std::string>(n, "subset_search");
    if (mode == "nested") {
      cfg.subset_search = SubsetSearch::Nested;
    } else if (mode == "exhaustive") {
      cfg.subset_search = SubsetSearch::Exhaustive;
    } else {
      throw ConfigError("subset_search must be 'nested' or 'exhaustive'");
    }
  }
  if (const auto p = root["prior"]) {
    if (!p.IsMap() || !p["a"] || !p["b"]) throw ConfigError("prior must be a mapping with keys a and b");
    cfg.prior = PriorParams{scalar<double>(p["a"], "prior.a"), scalar<double>(p["b"], "prior.b")};
  }
  if (const auto n = root["output_dir"]) cfg.output_dir = scalar<std::string>(n, "output_dir");
  if (const auto n = root["threads"]) cfg.threads = scalar<unsigned>(n, "threads");

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace minmean
