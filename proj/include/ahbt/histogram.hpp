#pragma once

// Delay histogram of detector-2 minus detector-1 time tags, peak
// accumulation, and the normalized m-th neighbour correlation.

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <vector>

#include "ahbt/experiment.hpp"
#include "ahbt/timetags.hpp"

namespace ahbt {

// Peaks m = -1 .. 4 are kept.
inline constexpr int kFirstPeak = -1;
inline constexpr int kLastPeak = 4;
inline constexpr int kPeakCount = kLastPeak - kFirstPeak + 1;

struct CoincidenceHistogram {
  std::int64_t origin_ps = 0;  // start of bin 0 (= -1.5 tau)
  std::int64_t bin_width_ps = 25;
  std::vector<std::uint64_t> counts;

  std::int64_t bin_start(std::size_t i) const { return origin_ps + static_cast<std::int64_t>(i) * bin_width_ps; }
  std::uint64_t total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }
};

inline CoincidenceHistogram empty_histogram(const ExperimentConfig& cfg) {
  const std::int64_t tau = cfg.period_ticks();
  const std::int64_t bw = cfg.bin_ticks();
  CoincidenceHistogram h;
  h.origin_ps = -(3 * tau) / 2;
  h.bin_width_ps = bw;
  const std::int64_t span = 6 * tau;
  h.counts.assign(static_cast<std::size_t>((span + bw - 1) / bw), 0);
  return h;
}

// Multi-stop: every (start, stop) pair with t2 - t1 in [-1.5 tau, 4.5 tau)
// is counted, not only the first stop after each start.
inline CoincidenceHistogram build_histogram(const TimeTagStream& s, const ExperimentConfig& cfg) {
  CoincidenceHistogram h = empty_histogram(cfg);
  const std::int64_t lo = h.origin_ps;
  const std::int64_t hi = lo + 6 * cfg.period_ticks();
  const auto& starts = s.events[0];
  const auto& stops = s.events[1];
  std::size_t first = 0;
  for (const std::int64_t t1 : starts) {
    while (first < stops.size() && stops[first] - t1 < lo) ++first;
    for (std::size_t j = first; j < stops.size(); ++j) {
      const std::int64_t delay = stops[j] - t1;
      if (delay >= hi) break;
      const auto bin = static_cast<std::size_t>((delay - lo) / h.bin_width_ps);
      if (bin < h.counts.size()) ++h.counts[bin];
    }
  }
  return h;
}

inline void write_histogram_csv(std::ostream& out, const CoincidenceHistogram& h, std::uint64_t seed) {
  out << "# seed=" << seed << '\n' << "bin_start_ps,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) out << h.bin_start(i) << ',' << h.counts[i] << '\n';
}

struct PeakCounts {
  std::array<double, kPeakCount> counts{};  // index m - kFirstPeak

  double& at(int m) { return counts.at(static_cast<std::size_t>(m - kFirstPeak)); }
  double at(int m) const { return counts.at(static_cast<std::size_t>(m - kFirstPeak)); }
};

// C_m = counts in bins starting inside [m tau - w/2, m tau + w/2).
inline PeakCounts accumulate_peaks(const CoincidenceHistogram& h, const ExperimentConfig& cfg) {
  const std::int64_t tau = cfg.period_ticks();
  const double w = cfg.peak_window_ps;
  if (!(w > 0.0) || w > static_cast<double>(tau)) {
    throw OverlappingWindows("peak window " + std::to_string(w) + " ps overlaps neighbouring peaks");
  }
  const auto half = static_cast<std::int64_t>(std::llround(0.5 * w));
  PeakCounts peaks;
  for (int m = kFirstPeak; m <= kLastPeak; ++m) {
    const std::int64_t from = m * tau - half;
    const std::int64_t to = m * tau + half;
    double c = 0.0;
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      const std::int64_t start = h.bin_start(i);
      if (start >= from && start < to) c += static_cast<double>(h.counts[i]);
    }
    peaks.at(m) = c;
  }
  return peaks;
}

struct CorrelationEstimate {
  int m = 0;
  double g = 0.0;
  double sigma = 0.0;
  double count = 0.0;
  double normalization = 0.0;
  double normalization_sigma = 0.0;
};

struct CorrelationEstimates {
  CorrelationEstimate zero;                // m = 0
  std::vector<CorrelationEstimate> others;  // m = -1, 1, 2, 3, 4
};

// g_m = C_m / mean(C_{m != 0}). The normalization uncertainty is the sample
// standard deviation of the five side peaks over sqrt(5); each C_m adds its
// own Poisson term. A zero count is given unit variance.
inline CorrelationEstimates estimate_g(const PeakCounts& peaks) {
  std::vector<double> side;
  for (int m = kFirstPeak; m <= kLastPeak; ++m) {
    if (m != 0) side.push_back(peaks.at(m));
  }
  for (double c : side) {
    if (!(c > 0.0)) throw EmptyNormalization("side peak with zero accumulated counts");
  }
  const double k = static_cast<double>(side.size());
  const double mean = std::accumulate(side.begin(), side.end(), 0.0) / k;
  double ss = 0.0;
  for (double c : side) ss += (c - mean) * (c - mean);
  const double sd = std::sqrt(ss / (k - 1.0));
  const double norm_sigma = sd / std::sqrt(k);

  auto estimate = [&](int m) {
    CorrelationEstimate e;
    e.m = m;
    e.count = peaks.at(m);
    e.normalization = mean;
    e.normalization_sigma = norm_sigma;
    e.g = e.count / mean;
    const double rel_count = 1.0 / std::max(e.count, 1.0);
    const double rel_norm = (norm_sigma / mean) * (norm_sigma / mean);
    e.sigma = std::max(e.g, 1.0 / mean) * std::sqrt(rel_count + rel_norm);
    return e;
  };

  CorrelationEstimates out;
  out.zero = estimate(0);
  for (int m = kFirstPeak; m <= kLastPeak; ++m) {
    if (m != 0) out.others.push_back(estimate(m));
  }
  return out;
}

}  // namespace ahbt
