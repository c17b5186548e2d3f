#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ahbt/pipeline.hpp"
#include "oracles.hpp"

using namespace ahbt;

namespace {

ExperimentConfig quiet_config() {
  ExperimentConfig c;
  c.jitter_fwhm_ps = 0.0;
  c.dark_rate_hz = 0.0;
  return c;
}

JointPnrDistribution point_mass(int n1, int n2) {
  JointPnrDistribution j;
  j.probability = Eigen::MatrixXd::Zero(3, 3);
  j.probability(n1, n2) = 1.0;
  return j;
}

// Synthetic correlated table with marginals 0.08 and g_corr = 2.
ClickTable strong_table() { return {0.08, 0.08, 2.0 * 0.08 * 0.08}; }

}  // namespace

TEST(ClickTable, PointMasses) {
  const auto both = per_pulse_click_probabilities(point_mass(1, 1), 1.0, 1.0);
  EXPECT_EQ(both.p1, 1.0);
  EXPECT_EQ(both.p2, 1.0);
  EXPECT_EQ(both.p12, 1.0);
  const auto one = per_pulse_click_probabilities(point_mass(1, 0), 0.7, 0.7);
  EXPECT_NEAR(one.p1, 0.7, 1e-15);
  EXPECT_EQ(one.p2, 0.0);
  EXPECT_EQ(one.p12, 0.0);
}

TEST(ClickTable, SqueezedVacuumAgainstExhaustiveSum) {
  const auto s = apply_two_mode_squeezer_fock(fock_vacuum({14, 14}), 0, 1, 0.1, 0.0);
  const auto j = joint_pnr(s, 0, 1);
  const double eta = 0.55;
  const auto t = per_pulse_click_probabilities(j, eta, eta);
  double p1 = 0.0, p2 = 0.0, p12 = 0.0;
  for (int a = 0; a <= 14; ++a) {
    for (int b = 0; b <= 14; ++b) {
      const double c1 = 1.0 - std::pow(1.0 - eta, a);
      const double c2 = 1.0 - std::pow(1.0 - eta, b);
      p1 += j.probability(a, b) * c1;
      p2 += j.probability(a, b) * c2;
      p12 += j.probability(a, b) * c1 * c2;
    }
  }
  EXPECT_NEAR(t.p1, p1, 1e-12);
  EXPECT_NEAR(t.p2, p2, 1e-12);
  EXPECT_NEAR(t.p12, p12, 1e-12);

  // Closed form on the diagonal: sum_n P(n) (1 - (1-eta)^n)^2.
  double diag = 0.0;
  for (int n = 0; n < 60; ++n) diag += oracle::tmsv_probability(n, 0.1) * std::pow(1.0 - std::pow(1.0 - eta, n), 2);
  EXPECT_NEAR(t.p12, diag, 1e-12);
}

TEST(ClickTable, GaussianRouteMatchesFockRoute) {
  CorrelatorParams p;
  p.input_amplitude = std::sqrt(2.29);
  const auto fc = build_correlator_fock(p, false);
  const auto fock = per_pulse_click_probabilities(joint_pnr(fc.state, fc.d1, fc.d2, false), p.eta1, p.eta2);
  const auto setup = build_correlator_circuit(p);
  const auto gauss = gaussian_click_table(setup.state, 1, 2);
  EXPECT_NEAR(fock.p1, gauss.p1, 1e-9);
  EXPECT_NEAR(fock.p2, gauss.p2, 1e-9);
  EXPECT_NEAR(fock.p12, gauss.p12, 1e-9);
}

TEST(ClickTable, EfficiencyIsAppliedOnce) {
  CorrelatorParams p;
  const auto fc = build_correlator_fock(p, true);
  const auto j = joint_pnr(fc.state, fc.d1, fc.d2, true);
  EXPECT_THROW(per_pulse_click_probabilities(j, 0.55, 0.55), DoubleEfficiencyApplication);
  EXPECT_NO_THROW(per_pulse_click_probabilities(j, 1.0, 1.0));
  // Both placements of the efficiency give the same table.
  const auto pre = build_correlator_fock(p, false);
  const auto a = per_pulse_click_probabilities(j, 1.0, 1.0);
  const auto b = per_pulse_click_probabilities(joint_pnr(pre.state, pre.d1, pre.d2, false), 0.55, 0.55);
  EXPECT_NEAR(a.p12, b.p12, 1e-10);
  EXPECT_NEAR(a.p1, b.p1, 1e-10);
}

TEST(Sampler, CorrelatedCoincidenceFractionMatchesP12) {
  const auto cfg = quiet_config();
  const ClickTable t{0.1, 0.12, 0.05};
  const auto stream = sample_pulse_train(cfg, t, t);
  const auto peaks = accumulate_peaks(build_histogram(stream, cfg), cfg);
  const double n = static_cast<double>(stream.pulses);
  const double sigma = std::sqrt(n * t.p12 * (1.0 - t.p12));
  EXPECT_NEAR(peaks.at(0), n * t.p12, 3.0 * sigma);
  const double s1 = std::sqrt(n * t.p1 * (1.0 - t.p1));
  EXPECT_NEAR(static_cast<double>(stream.events[0].size()), n * t.p1, 3.0 * s1);
}

TEST(Sampler, ProductSamplingHasNoZeroDelayExcess) {
  auto cfg = quiet_config();
  cfg.alpha = 0.0;
  const auto corr = strong_table();
  const auto run = run_counting(cfg, {0.0, corr, product_table(corr)});
  EXPECT_NEAR(run.estimates.zero.g, 1.0, 3.0 * run.estimates.zero.sigma);
}

TEST(Sampler, DarkCountsArePoisson) {
  ExperimentConfig cfg;
  cfg.integration_time_s = 1.0;
  cfg.jitter_fwhm_ps = 0.0;
  const ClickTable zero{};
  const auto s = sample_pulse_train(cfg, zero, zero);
  for (int d = 0; d < 2; ++d) {
    EXPECT_NEAR(static_cast<double>(s.events[d].size()), 100.0, 30.0);
  }
}

TEST(Sampler, StreamInvariants) {
  ExperimentConfig cfg;
  cfg.dark_rate_hz = 5000.0;
  const auto corr = strong_table();
  const auto s = sample_pulse_train(cfg, corr, product_table(corr));
  EXPECT_EQ(s.duration_ps, std::llround(static_cast<double>(s.pulses) * cfg.pulse_period_ps));
  for (const auto& ev : s.events) {
    ASSERT_FALSE(ev.empty());
    EXPECT_TRUE(std::adjacent_find(ev.begin(), ev.end(), std::greater_equal<>()) == ev.end());
    EXPECT_GE(ev.front(), 0);
    EXPECT_LE(ev.back(), s.duration_ps);
  }
}

TEST(Sampler, DeadTimeSpacing) {
  ExperimentConfig cfg;
  cfg.dead_time_ps = 50000.0;
  const ClickTable t{0.3, 0.3, 0.09};
  const auto s = sample_pulse_train(cfg, t, t);
  for (const auto& ev : s.events) {
    for (std::size_t i = 1; i < ev.size(); ++i) ASSERT_GE(ev[i] - ev[i - 1], 50000);
  }
}

TEST(Sampler, RejectsMismatchedMarginals) {
  const ClickTable a{0.1, 0.1, 0.02};
  const ClickTable b{0.1, 0.1 + 1e-9, 0.01};
  EXPECT_THROW(sample_pulse_train(ExperimentConfig{}, a, b), MarginalMismatch);
}

TEST(Sampler, DeterministicAndPartitionIndependent) {
  ExperimentConfig cfg;
  cfg.integration_time_s = 0.05;
  const auto corr = strong_table();
  const auto a = sample_pulse_train(cfg, corr, product_table(corr), 1);
  const auto b = sample_pulse_train(cfg, corr, product_table(corr), 4);
  const auto c = sample_pulse_train(cfg, corr, product_table(corr), 0);
  EXPECT_EQ(a.events, b.events);
  EXPECT_EQ(a.events, c.events);
  EXPECT_EQ(build_histogram(a, cfg).counts, build_histogram(b, cfg).counts);
  cfg.rng_seed += 1;
  EXPECT_NE(sample_pulse_train(cfg, corr, product_table(corr)).events, a.events);
}

// Property: expected g0 = 1 + alpha (g_corr - 1) with shared marginals.
TEST(Sampler, MixtureLaw) {
  const auto corr = strong_table();
  for (double alpha : {0.0, 0.45, 1.0}) {
    auto cfg = quiet_config();
    cfg.alpha = alpha;
    cfg.rng_seed = 77;
    const auto run = run_counting(cfg, {0.0, corr, product_table(corr)});
    EXPECT_NEAR(run.estimates.zero.g, 1.0 + alpha * (corr.g() - 1.0), 3.0 * run.estimates.zero.sigma)
        << "alpha=" << alpha;
    for (const auto& e : run.estimates.others) EXPECT_NEAR(e.g, 1.0, 3.0 * e.sigma) << "m=" << e.m;
  }
}

TEST(Histogram, ClicksOnePeriodApart) {
  const auto cfg = quiet_config();
  TimeTagStream s;
  s.events[0] = {100000};
  s.events[1] = {100000 + 12200};
  const auto h = build_histogram(s, cfg);
  EXPECT_EQ(h.total(), 1u);
  const auto it = std::find(h.counts.begin(), h.counts.end(), 1u);
  EXPECT_EQ(h.bin_start(static_cast<std::size_t>(it - h.counts.begin())), 12200);
  EXPECT_EQ(accumulate_peaks(h, cfg).at(1), 1.0);
}

TEST(Histogram, MultiStopCountsEveryPairInRange) {
  const auto cfg = quiet_config();
  TimeTagStream s;
  s.events[0] = {50000, 62200};
  s.events[1] = {50000, 62200, 74400, 50000 + 6 * 12200};
  const auto h = build_histogram(s, cfg);
  // First start sees delays 0, t, 2t (6t is out of range); the second sees -t, 0, t (5t is out).
  EXPECT_EQ(h.total(), 6u);
  const auto p = accumulate_peaks(h, cfg);
  EXPECT_EQ(p.at(-1), 1.0);
  EXPECT_EQ(p.at(0), 2.0);
  EXPECT_EQ(p.at(1), 2.0);
  EXPECT_EQ(p.at(2), 1.0);
}

TEST(Histogram, NoJitterPutsCountsOnPeakCentres) {
  const auto cfg = quiet_config();
  const auto corr = strong_table();
  const auto h = build_histogram(sample_pulse_train(cfg, corr, product_table(corr)), cfg);
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    if (h.counts[i] == 0) continue;
    EXPECT_EQ(h.bin_start(i) % 12200, 0) << h.bin_start(i);
  }
}

TEST(Histogram, JitterBroadenedPeakWidth) {
  ExperimentConfig cfg;
  const auto corr = strong_table();
  const auto h = build_histogram(sample_pulse_train(cfg, corr, product_table(corr)), cfg);
  // Second moment of the m = 1 peak around its centre.
  double w = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double centre = static_cast<double>(h.bin_start(i)) + 12.5 - 12200.0;
    if (std::abs(centre) > 1500.0) continue;
    w += static_cast<double>(h.counts[i]);
    m2 += static_cast<double>(h.counts[i]) * centre * centre;
  }
  const double fwhm = 2.0 * std::sqrt(2.0 * std::log(2.0)) * std::sqrt(m2 / w);
  EXPECT_NEAR(fwhm, std::sqrt(2.0) * 350.0, 0.2 * std::sqrt(2.0) * 350.0);
}

TEST(Peaks, SyntheticRecoveryAndWindowErrors) {
  const auto cfg = quiet_config();
  CoincidenceHistogram h = empty_histogram(cfg);
  for (int m = kFirstPeak; m <= kLastPeak; ++m) {
    const auto bin = static_cast<std::size_t>((m * 12200 - h.origin_ps) / h.bin_width_ps);
    h.counts[bin] = 100 + 10 * (m + 1);
    h.counts[bin + 10] = 1;  // 250 ps off centre, still inside the window
  }
  const auto p = accumulate_peaks(h, cfg);
  for (int m = kFirstPeak; m <= kLastPeak; ++m) EXPECT_EQ(p.at(m), 101.0 + 10 * (m + 1));

  auto wide = cfg;
  wide.peak_window_ps = 13000.0;
  EXPECT_THROW(accumulate_peaks(h, wide), OverlappingWindows);
}

TEST(Peaks, WindowWidthBarelyMatters) {
  ExperimentConfig cfg;
  const auto corr = strong_table();
  const auto h = build_histogram(sample_pulse_train(cfg, corr, product_table(corr)), cfg);
  auto narrow = cfg;
  narrow.peak_window_ps = 2000.0;
  const auto a = accumulate_peaks(h, cfg);
  const auto b = accumulate_peaks(h, narrow);
  for (int m = kFirstPeak; m <= kLastPeak; ++m) EXPECT_LT((a.at(m) - b.at(m)) / a.at(m), 1e-3);
}

TEST(Peaks, FlatDarkBackground) {
  ExperimentConfig cfg;
  cfg.dark_rate_hz = 3.0e5;
  cfg.integration_time_s = 1.0;
  const ClickTable zero{};
  const auto p = accumulate_peaks(build_histogram(sample_pulse_train(cfg, zero, zero), cfg), cfg);
  double mean = 0.0;
  for (double c : p.counts) mean += c / kPeakCount;
  ASSERT_GT(mean, 100.0);
  for (double c : p.counts) EXPECT_NEAR(c, mean, 3.0 * std::sqrt(mean));
}

TEST(Estimate, ExactArithmetic) {
  PeakCounts p;
  for (int m : {-1, 1, 2, 3, 4}) p.at(m) = 1000.0;
  p.at(0) = 2000.0;
  const auto e = estimate_g(p);
  EXPECT_EQ(e.zero.g, 2.0);
  EXPECT_NEAR(e.zero.sigma, 2.0 * std::sqrt(1.0 / 2000.0), 1e-15);
  ASSERT_EQ(e.others.size(), 5u);
  for (const auto& o : e.others) EXPECT_EQ(o.g, 1.0);
}

TEST(Estimate, UncertaintyAgainstBootstrap) {
  PeakCounts p;
  const double side[] = {990, 1010, 1000, 995, 1005};
  const int ms[] = {-1, 1, 2, 3, 4};
  for (int i = 0; i < 5; ++i) p.at(ms[i]) = side[i];
  p.at(0) = 1750.0;
  const auto e = estimate_g(p);
  EXPECT_NEAR(e.zero.g, 1.75, 1e-15);
  const double sd = oracle::stddev({990, 1010, 1000, 995, 1005});
  const double rel = 1.0 / 1750.0 + std::pow(sd / std::sqrt(5.0) / 1000.0, 2);
  EXPECT_NEAR(e.zero.sigma, 1.75 * std::sqrt(rel), 1e-12);

  // Parametric bootstrap: Poisson C0, side peaks resampled with replacement.
  std::mt19937_64 rng(12);
  std::poisson_distribution<int> c0(1750.0);
  std::uniform_int_distribution<int> pick(0, 4);
  std::vector<double> g;
  for (int b = 0; b < 40000; ++b) {
    double m = 0.0;
    for (int k = 0; k < 5; ++k) m += side[pick(rng)] / 5.0;
    g.push_back(c0(rng) / m);
  }
  EXPECT_NEAR(oracle::stddev(g), e.zero.sigma, 0.05 * e.zero.sigma);
}

TEST(Estimate, EmptyNormalization) {
  PeakCounts p;
  for (int m : {-1, 1, 2, 3}) p.at(m) = 10.0;
  p.at(0) = 5.0;
  EXPECT_THROW(estimate_g(p), EmptyNormalization);
}

TEST(Calibration, NoiselessInversion) {
  EXPECT_NEAR(calibrate_mean_photon(87200.0, 10000.0).n, 7.72, 1e-12);
  EXPECT_EQ(calibrate_mean_photon(10000.0, 10000.0).n, 0.0);
  EXPECT_THROW(calibrate_mean_photon(10.0, 0.0), ZeroBackground);
}

TEST(Calibration, PoissonPropagationAgainstResampling) {
  const auto e = calibrate_mean_photon(10900.0, 10000.0);
  EXPECT_NEAR(e.n, 0.09, 1e-12);
  EXPECT_NEAR(e.sigma, std::sqrt(10900.0 / 1e8 + 10900.0 * 10900.0 / 1e12), 1e-15);
  std::mt19937_64 rng(4);
  std::poisson_distribution<int> peak(10900.0), bg(10000.0);
  std::vector<double> n;
  for (int i = 0; i < 40000; ++i) n.push_back(static_cast<double>(peak(rng)) / bg(rng) - 1.0);
  EXPECT_NEAR(oracle::stddev(n), e.sigma, 0.03 * e.sigma);
}

TEST(Calibration, SimulatedSinglesWithinThreeSigma) {
  ExperimentConfig cfg;
  CorrelatorParams params;
  std::mt19937_64 rng(8);
  for (double n : reference_mean_photon_numbers()) {
    const auto t = prepare_point(params, n);
    const auto est = calibrate_mean_photon(simulate_singles(cfg, t.singles_stimulated, rng),
                                           simulate_singles(cfg, t.singles_background, rng));
    EXPECT_NEAR(est.n, n, 3.0 * est.sigma) << "n=" << n;
  }
}

TEST(Calibration, DelayScan) {
  const auto rows = scan_path_delay(1.09, 1000.0, 200.0, {-5000.0, 0.0, 5000.0});
  EXPECT_NEAR(rows[1].ratio, 2.09, 1e-15);
  EXPECT_NEAR(rows[1].counts, 2090.0, 1e-9);
  EXPECT_NEAR(rows[0].ratio, 1.0, 1e-12);
  EXPECT_NEAR(rows[2].ratio, 1.0, 1e-12);
  EXPECT_NEAR(scan_path_delay(7.72, 1.0, 100.0, {0.0})[0].ratio, 8.72, 1e-14);
  EXPECT_THROW(scan_path_delay(1.0, 1.0, 0.0, {0.0}), ParameterOutOfRange);
}

// Property: at low flux the click correlation tracks the photon-number one,
// and the deviation grows with flux.
TEST(ClickBias, LowFluxConsistency) {
  CorrelatorParams params;
  double previous = 0.0;
  for (double n : reference_mean_photon_numbers()) {
    const auto b = click_bias(params, n);
    ASSERT_LT(std::max(b.p1, b.p2), 0.05);
    EXPECT_LT(std::abs(b.relative_bias()), 0.02) << "n=" << n;
    EXPECT_GE(std::abs(b.relative_bias()), previous);
    previous = std::abs(b.relative_bias());
  }

  auto cfg = ExperimentConfig{};
  cfg.alpha = 1.0;
  const auto t = prepare_point(params, 1.09);
  const auto run = run_counting(cfg, t);
  const double g_number = model_g(1.09, 1.0);
  EXPECT_NEAR(run.estimates.zero.g, g_number, 0.02 * g_number + 3.0 * run.estimates.zero.sigma);
}
