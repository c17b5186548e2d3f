#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "ahbt/errors.hpp"

namespace ahbt {

// Timing and detector parameters of the pulsed coincidence experiment. Times
// are in picoseconds unless the name says otherwise.
struct ExperimentConfig {
  double pulse_period_ps = 12200.0;
  double repetition_rate_hz = 82.0e6;
  // Scaled run: 0.122 s at 82 MHz is just over 1e7 pulses. The laboratory
  // integration was 1800 s.
  double integration_time_s = 0.122;
  double singles_time_s = 1.0;
  double jitter_fwhm_ps = 350.0;
  double dark_rate_hz = 100.0;  // per detector
  double bin_width_ps = 25.0;
  double peak_window_ps = 3000.0;
  double dead_time_ps = 0.0;  // 0 disables dead time
  double alpha = 0.45;
  std::uint64_t rng_seed = 20061;

  // floor(integration_time * rate), guarded against 0.99999... from the product.
  std::uint64_t pulse_count() const {
    return static_cast<std::uint64_t>(std::floor(integration_time_s * repetition_rate_hz * (1.0 + 1e-12)));
  }

  double jitter_sigma_ps() const { return jitter_fwhm_ps / (2.0 * std::sqrt(2.0 * std::log(2.0))); }

  std::int64_t period_ticks() const { return std::llround(pulse_period_ps); }
  std::int64_t bin_ticks() const { return std::llround(bin_width_ps); }
};

// Throws ConfigError naming the first offending field.
inline void validate(const ExperimentConfig& c) {
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key, "must be positive");
  };
  auto non_negative = [](double v, const char* key) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(key, "must be non-negative");
  };
  positive(c.pulse_period_ps, "experiment.pulse_period_ps");
  positive(c.repetition_rate_hz, "experiment.repetition_rate_hz");
  positive(c.integration_time_s, "experiment.integration_time_s");
  positive(c.singles_time_s, "experiment.singles_time_s");
  non_negative(c.jitter_fwhm_ps, "experiment.jitter_fwhm_ps");
  non_negative(c.dark_rate_hz, "experiment.dark_rate_hz");
  positive(c.bin_width_ps, "experiment.bin_width_ps");
  positive(c.peak_window_ps, "experiment.peak_window_ps");
  non_negative(c.dead_time_ps, "experiment.dead_time_ps");
  if (std::abs(c.repetition_rate_hz * c.pulse_period_ps * 1e-12 - 1.0) > 0.01) {
    throw ConfigError("experiment.repetition_rate_hz", "inconsistent with pulse_period_ps (>1% apart)");
  }
  if (c.bin_width_ps != std::round(c.bin_width_ps) || c.pulse_period_ps != std::round(c.pulse_period_ps)) {
    throw ConfigError("experiment.bin_width_ps", "bin width and pulse period must be whole picoseconds");
  }
  if (!(c.peak_window_ps < 0.5 * c.pulse_period_ps)) {
    throw ConfigError("experiment.peak_window_ps", "must be below half the pulse period");
  }
  const double bins = c.peak_window_ps / c.bin_width_ps;
  if (bins < 2.0 || std::abs(bins - std::round(bins)) > 1.0) {
    throw ConfigError("experiment.peak_window_ps", "must span at least two whole bins");
  }
  if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) throw ConfigError("experiment.alpha", "must lie in [0, 1]");
  if (c.pulse_count() == 0) throw ConfigError("experiment.integration_time_s", "shorter than one pulse");
}

}  // namespace ahbt
