// ahbt: command-line front end.
//
//   ahbt exact     [--config F] [--set k=v]...
//   ahbt simulate  [--config F] [--set k=v]... --n N
//   ahbt fit       [--config F] [--set k=v]... DATA.csv
//   ahbt reproduce [--config F] [--set k=v]...
//   ahbt selftest
//
// Outputs go to <output.dir>/<output.prefix>_<name>.csv; a one-line summary
// goes to stdout. Config errors exit with status 2 and name the key.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ahbt/ahbt.hpp"

namespace {

using namespace ahbt;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config,-c", opts.config_path, "scenario INI file")->check(CLI::ExistingFile);
  cmd->add_option("--set,-s", opts.overrides, "override, section.key=value")->take_all();
}

ScenarioConfig load(const CommonOptions& opts) {
  if (opts.config_path.empty()) {
    std::istringstream empty;
    return parse_scenario(empty, opts.overrides);
  }
  std::ifstream in(opts.config_path);
  if (!in) throw std::runtime_error("cannot open " + opts.config_path);
  return parse_scenario(in, opts.overrides);
}

std::filesystem::path output_path(const ScenarioConfig& cfg, const std::string& name) {
  const std::filesystem::path dir(cfg.output.dir);
  std::filesystem::create_directories(dir);
  return dir / (cfg.output.prefix + "_" + name + ".csv");
}

template <typename Writer>
std::filesystem::path write_file(const ScenarioConfig& cfg, const std::string& name, Writer&& writer) {
  const auto path = output_path(cfg, name);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  writer(out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
  return path;
}

int cmd_exact(const CommonOptions& opts) {
  const auto cfg = load(opts);
  const auto rows = exact_table(cfg);
  const auto path = write_file(cfg, "exact", [&](std::ostream& o) { write_exact_csv(o, rows); });
  std::cout << "exact: " << rows.size() << " rows -> " << path.string() << '\n';
  return 0;
}

int cmd_simulate(const CommonOptions& opts, double n) {
  auto cfg = load(opts);
  if (!(n >= 0.0)) throw ConfigError("--n", "mean photon number must be >= 0");
  const auto tables = prepare_point(cfg.circuit, n);
  const auto run = run_counting(cfg.experiment, tables);
  const auto seed = cfg.experiment.rng_seed;
  write_file(cfg, "timetags", [&](std::ostream& o) { write_timetags_csv(o, run.stream); });
  write_file(cfg, "histogram", [&](std::ostream& o) { write_histogram_csv(o, run.histogram, seed); });
  const auto path = write_file(cfg, "estimates", [&](std::ostream& o) { write_estimates_csv(o, run.estimates, seed); });
  std::cout << "simulate: n=" << n << " g0=" << run.estimates.zero.g << " +- " << run.estimates.zero.sigma
            << " model=" << model_g(n, cfg.experiment.alpha) << " -> " << path.string() << '\n';
  return 0;
}

int cmd_fit(const CommonOptions& opts, const std::string& data_path) {
  const auto cfg = load(opts);
  std::ifstream in(data_path);
  if (!in) throw std::runtime_error("cannot open " + data_path);
  const auto points = read_data_points(in);
  const auto fit = fit_alpha(points, 1.0 - cfg.analysis.confidence);
  const auto path = write_file(cfg, "fit", [&](std::ostream& o) { write_fit_report(o, fit, points); });
  std::cout << "fit: alpha=" << fit.alpha_hat << " +- " << fit.alpha_sigma << " s=" << fit.s_min << " dof=" << fit.dof
            << " threshold=" << fit.threshold << (fit.passed ? " passed" : " FAILED")
            << (fit.alpha_in_range ? "" : " (alpha outside [0, 1])") << " -> " << path.string() << '\n';
  return 0;
}

int cmd_reproduce(const CommonOptions& opts) {
  const auto cfg = load(opts);
  const auto result = reproduce(cfg);
  write_file(cfg, "reproduce", [&](std::ostream& o) { write_reproduce_csv(o, result, cfg); });
  write_file(cfg, "data", [&](std::ostream& o) {
    o << "# seed=" << result.seed << '\n';
    write_data_points(o, data_points(result.points));
  });
  const auto path = write_file(cfg, "summary", [&](std::ostream& o) { write_reproduce_summary(o, result, cfg); });
  const auto& f = result.fit;
  std::cout << "reproduce: alpha=" << f.alpha_hat << " +- " << f.alpha_sigma << " s=" << f.s_min
            << " threshold=" << f.threshold << (f.passed ? " passed" : " FAILED") << " -> " << path.string() << '\n';
  return 0;
}

int cmd_selftest() {
  bool ok = true;
  const auto& ns = reference_mean_photon_numbers();
  double worst = 0.0;
  for (double n : ns) {
    CorrelatorParams p;
    p.input_amplitude = std::sqrt(n);
    const auto setup = build_correlator_circuit(p);
    worst = std::max(worst, std::abs(hbt_correlator(setup.state, 1, 2) - antinormal_g2_coherent(n)));
  }
  const bool closed = worst <= 1e-9;
  ok = ok && closed;
  std::cout << (closed ? "PASS" : "FAIL") << " closed-form correlator, max error " << worst << '\n';
  for (double r : {0.05, 0.1, 0.3}) {
    for (double n : {0.0, 1.0, 4.0, 10.0}) {
      CorrelatorParams p;
      p.r = r;
      const auto c = compare_with_oracle(p, n);
      ok = ok && c.passed;
      std::cout << (c.passed ? "PASS" : "FAIL") << " oracle r=" << r << " n=" << n << " error " << c.max_abs_error
                << " tolerance " << c.tolerance << '\n';
    }
  }
  std::cout << (ok ? "selftest passed" : "selftest FAILED") << '\n';
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Antinormally ordered HBT correlation simulator"};
  app.require_subcommand(1);

  CommonOptions common;
  double n = -1.0;
  std::string data_path;

  auto* exact = app.add_subcommand("exact", "exact correlator over circuit.n_values");
  add_common(exact, common);
  auto* simulate = app.add_subcommand("simulate", "time tags, histogram and g estimates for one input");
  add_common(simulate, common);
  simulate->add_option("--n", n, "input mean photon number")->required();
  auto* fit = app.add_subcommand("fit", "fit alpha to an n,sigma_n,g,sigma_g CSV");
  add_common(fit, common);
  fit->add_option("data", data_path, "data CSV")->required()->check(CLI::ExistingFile);
  auto* repro = app.add_subcommand("reproduce", "calibrate, simulate, estimate and fit over all inputs");
  add_common(repro, common);
  auto* selftest = app.add_subcommand("selftest", "closed-form and oracle equivalence checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (exact->parsed()) return cmd_exact(common);
    if (simulate->parsed()) return cmd_simulate(common, n);
    if (fit->parsed()) return cmd_fit(common, data_path);
    if (repro->parsed()) return cmd_reproduce(common);
    if (selftest->parsed()) return cmd_selftest();
  } catch (const ConfigError& e) {
    std::cerr << "ahbt: config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ahbt: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
