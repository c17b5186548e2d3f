#pragma once

// Threshold (click / no-click) detection of the two detector modes.

#include <array>
#include <cmath>

#include "ahbt/circuit.hpp"
#include "ahbt/fock.hpp"
#include "ahbt/moments.hpp"

namespace ahbt {

// Per-pulse click probabilities of detectors 1 and 2 and of a coincidence.
struct ClickTable {
  double p1 = 0.0;
  double p2 = 0.0;
  double p12 = 0.0;

  double only_1() const { return p1 - p12; }
  double only_2() const { return p2 - p12; }
  double any() const { return p1 + p2 - p12; }
  double none() const { return 1.0 - any(); }
  double g() const { return p12 / (p1 * p2); }
};

// Uncorrelated table with the same marginals.
inline ClickTable product_table(const ClickTable& t) { return {t.p1, t.p2, t.p1 * t.p2}; }

// p_k = sum P(n1, n2) (1 - (1 - eta_k)^{n_k}), written through the no-click
// sums q_k = sum P (1 - eta_k)^{n_k}: p_k = sum P - q_k and
// p12 = sum P - q_1 - q_2 + q_12. Probability lost to truncation counts as
// "no click".
inline ClickTable per_pulse_click_probabilities(const JointPnrDistribution& joint, double eta1, double eta2) {
  if (!(eta1 >= 0.0 && eta1 <= 1.0 && eta2 >= 0.0 && eta2 <= 1.0)) {
    throw ParameterOutOfRange("click efficiency outside [0, 1]");
  }
  if (joint.efficiency_included && (eta1 != 1.0 || eta2 != 1.0)) {
    throw DoubleEfficiencyApplication(
        "joint distribution already includes detector efficiency; pass eta = 1");
  }
  const auto& p = joint.probability;
  double total = 0.0, q1 = 0.0, q2 = 0.0, q12 = 0.0;
  for (Eigen::Index n1 = 0; n1 < p.rows(); ++n1) {
    const double miss1 = std::pow(1.0 - eta1, static_cast<double>(n1));
    for (Eigen::Index n2 = 0; n2 < p.cols(); ++n2) {
      const double miss2 = std::pow(1.0 - eta2, static_cast<double>(n2));
      const double w = p(n1, n2);
      total += w;
      q1 += w * miss1;
      q2 += w * miss2;
      q12 += w * miss1 * miss2;
    }
  }
  return {total - q1, total - q2, total - q1 - q2 + q12};
}

// Same table from a Gaussian state through vacuum probabilities of the lossy
// detector modes.
inline ClickTable gaussian_click_table(const GaussianState& state, int mode_1, int mode_2, double eta1 = 1.0,
                                       double eta2 = 1.0) {
  const std::array<int, 1> m1{mode_1};
  const std::array<int, 1> m2{mode_2};
  const std::array<int, 2> m12{mode_1, mode_2};
  const std::array<double, 1> e1{eta1};
  const std::array<double, 1> e2{eta2};
  const std::array<double, 2> e12{eta1, eta2};
  const double q1 = vacuum_probability(state, m1, e1);
  const double q2 = vacuum_probability(state, m2, e2);
  const double q12 = vacuum_probability(state, m12, e12);
  return {1.0 - q1, 1.0 - q2, 1.0 - q1 - q2 + q12};
}

// Click-based versus photon-number correlation for one operating point.
struct ClickBias {
  double n = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double g_click = 0.0;
  double g_number = 0.0;

  // Fraction of the photon-number bunching excess that survives threshold
  // detection.
  double excess_ratio() const { return (g_click - 1.0) / (g_number - 1.0); }
  double relative_bias() const { return g_click / g_number - 1.0; }
};

inline ClickBias click_bias(CorrelatorParams params, double n) {
  params.input_amplitude = std::sqrt(n);
  const auto setup = build_correlator_circuit(params);
  const int d1 = setup.circuit.mode("d1");
  const int d2 = setup.circuit.mode("d2");
  const ClickTable t = gaussian_click_table(setup.state, d1, d2);
  return {n, t.p1, t.p2, t.g(), hbt_correlator(setup.state, d1, d2)};
}

}  // namespace ahbt
