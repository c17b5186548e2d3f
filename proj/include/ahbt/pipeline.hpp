#pragma once

// End-to-end pipeline: photon statistics -> click tables -> time tags ->
// delay histogram -> peak counts -> g estimates, plus singles calibration and
// the alpha fit over a set of input mean photon numbers.

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <vector>

#include "ahbt/analysis.hpp"
#include "ahbt/calibration.hpp"
#include "ahbt/clicks.hpp"
#include "ahbt/fock.hpp"
#include "ahbt/histogram.hpp"
#include "ahbt/moments.hpp"
#include "ahbt/scenario.hpp"
#include "ahbt/timetags.hpp"

namespace ahbt {

// Click tables for one input mean photon number.
struct PointTables {
  double n = 0.0;
  ClickTable correlated;
  ClickTable product;
  double singles_stimulated = 0.0;  // detected photons per pulse at d1, |T|^2 = 1, input on
  double singles_background = 0.0;  // same with the input blocked
  double truncation_deficit = 0.0;
};

namespace detail {

inline double singles_detected_mean(CorrelatorParams p) {
  p.t_sq = 1.0;
  const auto setup = build_correlator_circuit(p);
  return mean_photon(setup.state, setup.circuit.mode("d1"));
}

}  // namespace detail

// Detector efficiencies are left out of the Fock evolution and applied once,
// by the click model.
inline PointTables prepare_point(CorrelatorParams params, double n) {
  if (!(n >= 0.0)) throw ParameterOutOfRange("prepare_point: n must be >= 0");
  params.input_amplitude = std::sqrt(n);
  const auto fc = build_correlator_fock(params, false);
  const auto joint = joint_pnr(fc.state, fc.d1, fc.d2, false);
  PointTables t;
  t.n = n;
  t.correlated = per_pulse_click_probabilities(joint, params.eta1, params.eta2);
  t.product = product_table(t.correlated);
  t.truncation_deficit = joint.truncation_deficit;
  t.singles_stimulated = detail::singles_detected_mean(params);
  CorrelatorParams blocked = params;
  blocked.input_amplitude = 0.0;
  t.singles_background = detail::singles_detected_mean(blocked);
  return t;
}

inline std::vector<PointTables> prepare_points(const ScenarioConfig& cfg) {
  std::vector<PointTables> out;
  out.reserve(cfg.n_values.size());
  for (double n : cfg.n_values) out.push_back(prepare_point(cfg.circuit, n));
  return out;
}

struct CountingRun {
  TimeTagStream stream;
  CoincidenceHistogram histogram;
  PeakCounts peaks;
  CorrelationEstimates estimates;
};

inline CountingRun run_counting(const ExperimentConfig& cfg, const PointTables& tables, unsigned threads = 0) {
  CountingRun run;
  run.stream = sample_pulse_train(cfg, tables.correlated, tables.product, threads);
  run.histogram = build_histogram(run.stream, cfg);
  run.peaks = accumulate_peaks(run.histogram, cfg);
  run.estimates = estimate_g(run.peaks);
  return run;
}

struct PointResult {
  double n_nominal = 0.0;
  MeanPhotonEstimate calibration;
  PeakCounts peaks;
  CorrelationEstimates estimates;
  double g_model = 0.0;  // model_g(n_nominal, alpha of the run)
};

struct ReproduceResult {
  std::vector<PointResult> points;
  FitResult fit;
  std::uint64_t seed = 0;
};

// Substreams: (seed, point, 2) drives the counting run, (seed, point, 3) the
// singles calibration.
inline PointResult simulate_point(const ScenarioConfig& cfg, const PointTables& tables, std::size_t index,
                                  std::uint64_t seed, unsigned threads = 0) {
  ExperimentConfig exp = cfg.experiment;
  exp.rng_seed = derive_seed(seed, index, 2);
  const CountingRun run = run_counting(exp, tables, threads);

  std::mt19937_64 rng(derive_seed(seed, index, 3));
  const double peak = simulate_singles(cfg.experiment, tables.singles_stimulated, rng);
  const double background = simulate_singles(cfg.experiment, tables.singles_background, rng);

  PointResult r;
  r.n_nominal = tables.n;
  r.calibration = calibrate_mean_photon(peak, background);
  r.peaks = run.peaks;
  r.estimates = run.estimates;
  r.g_model = model_g(tables.n, cfg.experiment.alpha);
  return r;
}

// Fit over calibrated photon numbers; horizontal errors are carried but not
// used.
inline std::vector<DataPoint> data_points(const std::vector<PointResult>& points) {
  std::vector<DataPoint> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    out.push_back({std::max(p.calibration.n, 0.0), p.calibration.sigma, p.estimates.zero.g, p.estimates.zero.sigma});
  }
  return out;
}

inline ReproduceResult reproduce(const ScenarioConfig& cfg, const std::vector<PointTables>& tables,
                                 std::uint64_t seed, unsigned threads = 0) {
  ReproduceResult r;
  r.seed = seed;
  for (std::size_t i = 0; i < tables.size(); ++i) r.points.push_back(simulate_point(cfg, tables[i], i, seed, threads));
  if (r.points.size() >= 2) r.fit = fit_alpha(data_points(r.points), 1.0 - cfg.analysis.confidence);
  return r;
}

inline ReproduceResult reproduce(const ScenarioConfig& cfg, unsigned threads = 0) {
  return reproduce(cfg, prepare_points(cfg), cfg.experiment.rng_seed, threads);
}

inline void write_reproduce_csv(std::ostream& out, const ReproduceResult& r, const ScenarioConfig& cfg) {
  std::ostringstream os;
  os.precision(10);
  os << "# seed=" << r.seed << '\n';
  os << "n_nominal,n_hat,sigma_n,c0,normalization,g0,sigma_g0,error_bar,g_m-1,g_m1,g_m2,g_m3,g_m4,"
        "g_model_config,g_model_fit\n";
  for (const auto& p : r.points) {
    os << p.n_nominal << ',' << p.calibration.n << ',' << p.calibration.sigma << ',' << p.estimates.zero.count << ','
       << p.estimates.zero.normalization << ',' << p.estimates.zero.g << ',' << p.estimates.zero.sigma << ','
       << cfg.analysis.error_bar_multiplier * p.estimates.zero.sigma;
    for (const auto& e : p.estimates.others) os << ',' << e.g;
    os << ',' << p.g_model << ',' << model_g(std::max(p.calibration.n, 0.0), r.fit.alpha_hat) << '\n';
  }
  out << os.str();
}

inline void write_reproduce_summary(std::ostream& out, const ReproduceResult& r, const ScenarioConfig& cfg) {
  std::ostringstream os;
  os.precision(10);
  os << "# seed=" << r.seed << '\n';
  os << "key,value\n";
  os << "points," << r.points.size() << '\n';
  os << "alpha_config," << cfg.experiment.alpha << '\n';
  os << "alpha_hat," << r.fit.alpha_hat << '\n';
  os << "alpha_sigma," << r.fit.alpha_sigma << '\n';
  os << "s_min," << r.fit.s_min << '\n';
  os << "dof," << r.fit.dof << '\n';
  os << "threshold," << r.fit.threshold << '\n';
  os << "p_value," << r.fit.p_value << '\n';
  os << "passed," << (r.fit.passed ? "true" : "false") << '\n';
  os << "alpha_in_range," << (r.fit.alpha_in_range ? "true" : "false") << '\n';
  out << os.str();
}

// Exact correlation over an n grid: Gaussian correlator next to the model at
// alpha = 1 and at the configured alpha.
struct ExactRow {
  double n = 0.0;
  double g_exact = 0.0;
  double g_model_alpha1 = 0.0;
  double g_model_alpha = 0.0;
};

inline std::vector<ExactRow> exact_table(const ScenarioConfig& cfg) {
  std::vector<ExactRow> rows;
  for (double n : cfg.n_values) {
    CorrelatorParams p = cfg.circuit;
    p.input_amplitude = std::sqrt(n);
    const auto setup = build_correlator_circuit(p);
    const double g = hbt_correlator(setup.state, setup.circuit.mode("d1"), setup.circuit.mode("d2"));
    rows.push_back({n, g, model_g(n, 1.0), model_g(n, cfg.experiment.alpha)});
  }
  return rows;
}

inline void write_exact_csv(std::ostream& out, const std::vector<ExactRow>& rows) {
  std::ostringstream os;
  os.precision(15);
  os << "n,g_exact,g_model_alpha1,g_model_alpha\n";
  for (const auto& r : rows) os << r.n << ',' << r.g_exact << ',' << r.g_model_alpha1 << ',' << r.g_model_alpha << '\n';
  out << os.str();
}

inline void write_estimates_csv(std::ostream& out, const CorrelationEstimates& e, std::uint64_t seed) {
  std::ostringstream os;
  os.precision(10);
  os << "# seed=" << seed << '\n';
  os << "m,g,sigma,count,normalization,normalization_sigma\n";
  auto row = [&os](const CorrelationEstimate& c) {
    os << c.m << ',' << c.g << ',' << c.sigma << ',' << c.count << ',' << c.normalization << ','
       << c.normalization_sigma << '\n';
  };
  row(e.others.front());
  row(e.zero);
  for (std::size_t i = 1; i < e.others.size(); ++i) row(e.others[i]);
  out << os.str();
}

// Oracle equivalence between the Gaussian engine and the Fock simulator on
// the correlator circuit.
struct OracleComparison {
  double r = 0.0;
  double n = 0.0;
  double deficit = 0.0;
  double tolerance = 0.0;
  double max_abs_error = 0.0;  // over <n1>, <n2>, <n1 n2>, g
  bool passed = false;
};

inline OracleComparison compare_with_oracle(CorrelatorParams p, double n) {
  p.input_amplitude = std::sqrt(n);
  const auto setup = build_correlator_circuit(p);
  const int d1 = setup.circuit.mode("d1");
  const int d2 = setup.circuit.mode("d2");
  const auto fc = build_correlator_fock(p, true);
  OracleComparison c;
  c.r = p.r;
  c.n = n;
  c.deficit = fc.state.truncation_deficit();
  c.tolerance = std::max(1e-6, 10.0 * c.deficit);
  const double errs[] = {
      std::abs(mean_photon(setup.state, d1) - fock_mean_photon(fc.state, fc.d1)),
      std::abs(mean_photon(setup.state, d2) - fock_mean_photon(fc.state, fc.d2)),
      std::abs(photon_number_covariance(setup.state, d1, d2) - fock_number_correlation(fc.state, fc.d1, fc.d2)),
      std::abs(hbt_correlator(setup.state, d1, d2) - fock_hbt_correlator(fc.state, fc.d1, fc.d2)),
  };
  for (double e : errs) c.max_abs_error = std::max(c.max_abs_error, e);
  c.passed = c.max_abs_error <= c.tolerance;
  return c;
}

}  // namespace ahbt
