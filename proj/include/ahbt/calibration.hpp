#pragma once

// Mean-photon-number calibration from stimulated versus spontaneous singles.
// With |T|^2 = 1 the stimulated singles rate is proportional to <n> + 1 and the
// spontaneous background to 1, so their ratio gives <n>.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ahbt/errors.hpp"
#include "ahbt/experiment.hpp"

namespace ahbt {

struct MeanPhotonEstimate {
  double n = 0.0;
  double sigma = 0.0;
};

// n = P/B - 1 with Poisson counts P and B:
// var(P/B) = P/B^2 + P^2/B^3 to first order.
inline MeanPhotonEstimate calibrate_mean_photon(double peak_counts, double background_counts) {
  if (!(background_counts > 0.0)) throw ZeroBackground("calibrate_mean_photon: background must be > 0");
  if (!(peak_counts >= 0.0)) throw std::invalid_argument("calibrate_mean_photon: negative peak counts");
  const double ratio = peak_counts / background_counts;
  const double var = peak_counts / (background_counts * background_counts) +
                     peak_counts * peak_counts / (background_counts * background_counts * background_counts);
  return {ratio - 1.0, std::sqrt(var)};
}

struct DelayScanRow {
  double delay_ps = 0.0;
  double counts = 0.0;
  double ratio = 0.0;  // counts / background
};

// Expected singles versus pump/signal path delay: the stimulated part has a
// Gaussian overlap envelope of width envelope_width_ps on top of the constant
// spontaneous background.
inline std::vector<DelayScanRow> scan_path_delay(double n, double background, double envelope_width_ps,
                                                 const std::vector<double>& delays_ps) {
  if (!(envelope_width_ps > 0.0)) throw ParameterOutOfRange("scan_path_delay: envelope width must be > 0");
  std::vector<DelayScanRow> rows;
  rows.reserve(delays_ps.size());
  for (double d : delays_ps) {
    const double ratio = 1.0 + n * std::exp(-d * d / (2.0 * envelope_width_ps * envelope_width_ps));
    rows.push_back({d, background * ratio, ratio});
  }
  return rows;
}

// Poisson singles count of one detector over cfg.singles_time_s. The rate is
// linear in the mean detected photon number per pulse (no click saturation);
// dark counts included.
inline double simulate_singles(const ExperimentConfig& cfg, double detected_per_pulse, std::mt19937_64& rng) {
  if (!(detected_per_pulse >= 0.0)) throw std::invalid_argument("simulate_singles: negative rate");
  const double expected = cfg.singles_time_s * (cfg.repetition_rate_hz * detected_per_pulse + cfg.dark_rate_hz);
  std::poisson_distribution<std::uint64_t> counts(expected);
  return static_cast<double>(counts(rng));
}

}  // namespace ahbt
