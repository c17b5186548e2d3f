#pragma once

// Scenario configuration: one INI file with [circuit], [experiment],
// [analysis] and [output] sections. Every key may be overridden with
// "section.key=value" strings (the CLI's --set flag).

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ahbt/circuit.hpp"
#include "ahbt/errors.hpp"
#include "ahbt/experiment.hpp"

namespace ahbt {

inline const std::vector<double>& reference_mean_photon_numbers() {
  static const std::vector<double> n{0.0, 0.71, 1.09, 2.29, 4.36, 7.72, 10.61};
  return n;
}

struct AnalysisConfig {
  double confidence = 0.95;           // goodness-of-fit level
  double error_bar_multiplier = 3.0;  // error bars in standard deviations
};

struct OutputConfig {
  std::string dir = ".";
  std::string prefix = "ahbt";
};

struct ScenarioConfig {
  CorrelatorParams circuit;
  std::vector<double> n_values = reference_mean_photon_numbers();
  ExperimentConfig experiment;
  AnalysisConfig analysis;
  OutputConfig output;
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (text.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(text);
    if (!std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError(key, "not a number: '" + text + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  try {
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) throw std::invalid_argument(text);
    return std::stoull(text);
  } catch (const std::logic_error&) {
    throw ConfigError(key, "not an unsigned integer: '" + text + "'");
  }
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    const auto b = item.find_last_not_of(" \t");
    out.push_back(parse_double(key, item.substr(a, b - a + 1)));
  }
  return out;
}

using Setter = std::function<void(ScenarioConfig&, const std::string& key, const std::string& value)>;

inline const std::map<std::string, Setter>& scenario_setters() {
  static const std::map<std::string, Setter> setters = [] {
    std::map<std::string, Setter> m;
    auto dbl = [&m](const std::string& key, std::function<double&(ScenarioConfig&)> ref) {
      m[key] = [ref](ScenarioConfig& c, const std::string& k, const std::string& v) { ref(c) = parse_double(k, v); };
    };
    dbl("circuit.r", [](ScenarioConfig& c) -> double& { return c.circuit.r; });
    dbl("circuit.theta", [](ScenarioConfig& c) -> double& { return c.circuit.theta; });
    dbl("circuit.t_sq", [](ScenarioConfig& c) -> double& { return c.circuit.t_sq; });
    dbl("circuit.eta1", [](ScenarioConfig& c) -> double& { return c.circuit.eta1; });
    dbl("circuit.eta2", [](ScenarioConfig& c) -> double& { return c.circuit.eta2; });
    m["circuit.n_values"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.n_values = parse_list(k, v);
    };
    dbl("experiment.pulse_period_ps", [](ScenarioConfig& c) -> double& { return c.experiment.pulse_period_ps; });
    dbl("experiment.repetition_rate_hz", [](ScenarioConfig& c) -> double& { return c.experiment.repetition_rate_hz; });
    dbl("experiment.integration_time_s", [](ScenarioConfig& c) -> double& { return c.experiment.integration_time_s; });
    dbl("experiment.singles_time_s", [](ScenarioConfig& c) -> double& { return c.experiment.singles_time_s; });
    dbl("experiment.jitter_fwhm_ps", [](ScenarioConfig& c) -> double& { return c.experiment.jitter_fwhm_ps; });
    dbl("experiment.dark_rate_hz", [](ScenarioConfig& c) -> double& { return c.experiment.dark_rate_hz; });
    dbl("experiment.bin_width_ps", [](ScenarioConfig& c) -> double& { return c.experiment.bin_width_ps; });
    dbl("experiment.peak_window_ps", [](ScenarioConfig& c) -> double& { return c.experiment.peak_window_ps; });
    dbl("experiment.dead_time_ps", [](ScenarioConfig& c) -> double& { return c.experiment.dead_time_ps; });
    dbl("experiment.alpha", [](ScenarioConfig& c) -> double& { return c.experiment.alpha; });
    m["experiment.rng_seed"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.experiment.rng_seed = parse_u64(k, v);
    };
    dbl("analysis.confidence", [](ScenarioConfig& c) -> double& { return c.analysis.confidence; });
    dbl("analysis.error_bar_multiplier", [](ScenarioConfig& c) -> double& { return c.analysis.error_bar_multiplier; });
    m["output.dir"] = [](ScenarioConfig& c, const std::string&, const std::string& v) { c.output.dir = v; };
    m["output.prefix"] = [](ScenarioConfig& c, const std::string&, const std::string& v) { c.output.prefix = v; };
    return m;
  }();
  return setters;
}

}  // namespace detail

inline void set_scenario_key(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
  const auto& setters = detail::scenario_setters();
  auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError(key, "unknown key");
  it->second(cfg, key, value);
}

// "section.key=value"
inline void apply_override(ScenarioConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError(assignment, "override must look like section.key=value");
  set_scenario_key(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

inline void validate(const ScenarioConfig& cfg) {
  const auto& c = cfg.circuit;
  if (!(c.r >= 0.0)) throw ConfigError("circuit.r", "must be >= 0");
  auto unit = [](double v, const char* key) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(key, "must lie in [0, 1]");
  };
  unit(c.t_sq, "circuit.t_sq");
  unit(c.eta1, "circuit.eta1");
  unit(c.eta2, "circuit.eta2");
  for (double n : cfg.n_values) {
    if (!(n >= 0.0)) throw ConfigError("circuit.n_values", "mean photon numbers must be >= 0");
  }
  validate(cfg.experiment);
  if (!(cfg.analysis.confidence > 0.0 && cfg.analysis.confidence < 1.0)) {
    throw ConfigError("analysis.confidence", "must lie in (0, 1)");
  }
  if (!(cfg.analysis.error_bar_multiplier > 0.0)) {
    throw ConfigError("analysis.error_bar_multiplier", "must be positive");
  }
  if (cfg.output.prefix.empty()) throw ConfigError("output.prefix", "must not be empty");
}

inline ScenarioConfig parse_scenario(std::istream& in, const std::vector<std::string>& overrides = {}) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config", std::string("line ") + std::to_string(e.line()) + ": " + e.message());
  }
  ScenarioConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError(section, "key outside any section");
    for (const auto& [key, value] : body) set_scenario_key(cfg, section + "." + key, value.data());
  }
  for (const auto& o : overrides) apply_override(cfg, o);
  validate(cfg);
  return cfg;
}

}  // namespace ahbt
