#pragma once

// Monte Carlo pulse-train sampler producing detector time tags.
//
// The train is cut into fixed blocks of kPulsesPerBlock pulses. Each block
// draws from its own generator seeded from (seed, block index), so the output
// depends on the seed only and not on how blocks are spread over threads.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <thread>
#include <vector>

#include "ahbt/clicks.hpp"
#include "ahbt/experiment.hpp"

namespace ahbt {

inline constexpr std::uint64_t kPulsesPerBlock = 1u << 20;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent substream key for (seed, a, b).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

struct TimeTagStream {
  // Detector 1 and detector 2 timestamps, strictly increasing, in ps.
  std::array<std::vector<std::int64_t>, 2> events;
  std::int64_t duration_ps = 0;
  std::uint64_t pulses = 0;
  std::uint64_t seed = 0;
};

inline void check_tables(const ClickTable& correlated, const ClickTable& product) {
  if (std::abs(correlated.p1 - product.p1) > 1e-12 || std::abs(correlated.p2 - product.p2) > 1e-12) {
    throw MarginalMismatch("correlated and product click tables have different marginals");
  }
  for (const ClickTable* t : {&correlated, &product}) {
    if (t->p12 < -1e-15 || t->only_1() < -1e-15 || t->only_2() < -1e-15 || t->none() < -1e-15) {
      throw std::invalid_argument("click table is not a probability table");
    }
  }
}

namespace detail {

struct BlockOutput {
  std::array<std::vector<std::int64_t>, 2> events;
};

inline BlockOutput sample_block(const ExperimentConfig& cfg, const ClickTable& corr, const ClickTable& prod,
                                std::uint64_t block, std::uint64_t first, std::uint64_t last) {
  BlockOutput out;
  std::mt19937_64 rng(derive_seed(cfg.rng_seed, block, 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double sigma = cfg.jitter_sigma_ps();
  const double tau = cfg.pulse_period_ps;

  const double any_corr = std::clamp(corr.any(), 0.0, 1.0);
  const double any_prod = std::clamp(prod.any(), 0.0, 1.0);
  const double any = cfg.alpha * any_corr + (1.0 - cfg.alpha) * any_prod;

  auto stamp = [&](std::uint64_t pulse, int det) {
    double t = (static_cast<double>(pulse) + 0.5) * tau;
    if (sigma > 0.0) t += sigma * gauss(rng);
    out.events[det].push_back(std::llround(t));
  };

  if (any > 0.0) {
    std::geometric_distribution<std::uint64_t> skip(any < 1.0 ? any : 0.5);
    std::uint64_t k = first;
    while (true) {
      k += (any >= 1.0) ? 0 : skip(rng);
      if (k >= last) break;
      // Which component of the alpha mixture produced this non-empty pulse.
      const bool correlated = unit(rng) * any < cfg.alpha * any_corr;
      const ClickTable& t = correlated ? corr : prod;
      const double u = unit(rng) * t.any();
      if (u < t.only_1()) {
        stamp(k, 0);
      } else if (u < t.only_1() + t.only_2()) {
        stamp(k, 1);
      } else {
        stamp(k, 0);
        stamp(k, 1);
      }
      ++k;
    }
  }

  if (cfg.dark_rate_hz > 0.0) {
    const double t0 = static_cast<double>(first) * tau;
    const double t1 = static_cast<double>(last) * tau;
    std::poisson_distribution<std::uint64_t> dark(cfg.dark_rate_hz * (t1 - t0) * 1e-12);
    for (int det = 0; det < 2; ++det) {
      const std::uint64_t count = dark(rng);
      for (std::uint64_t i = 0; i < count; ++i) out.events[det].push_back(std::llround(t0 + unit(rng) * (t1 - t0)));
    }
  }
  return out;
}

}  // namespace detail

// Samples floor(integration_time * rate) pulses. Each pulse is drawn from the
// correlated table with probability alpha and from the product table
// otherwise; clicks are stamped at the pulse centre plus Gaussian jitter, dark
// counts are a homogeneous Poisson process. Events coinciding to the
// picosecond are merged, and events inside the dead time of the previous
// accepted event are dropped.
inline TimeTagStream sample_pulse_train(const ExperimentConfig& cfg, const ClickTable& correlated,
                                        const ClickTable& product, unsigned threads = 0) {
  validate(cfg);
  check_tables(correlated, product);
  const std::uint64_t pulses = cfg.pulse_count();
  const std::uint64_t blocks = (pulses + kPulsesPerBlock - 1) / kPulsesPerBlock;
  std::vector<detail::BlockOutput> parts(blocks);

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, blocks));
  std::atomic<std::uint64_t> next{0};
  auto worker = [&]() {
    for (std::uint64_t b = next++; b < blocks; b = next++) {
      const std::uint64_t first = b * kPulsesPerBlock;
      const std::uint64_t last = std::min(pulses, first + kPulsesPerBlock);
      parts[b] = detail::sample_block(cfg, correlated, product, b, first, last);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  TimeTagStream s;
  s.pulses = pulses;
  s.seed = cfg.rng_seed;
  s.duration_ps = std::llround(static_cast<double>(pulses) * cfg.pulse_period_ps);
  const auto dead = std::llround(cfg.dead_time_ps);
  for (int det = 0; det < 2; ++det) {
    auto& ev = s.events[det];
    std::size_t total = 0;
    for (const auto& p : parts) total += p.events[det].size();
    ev.reserve(total);
    for (const auto& p : parts) ev.insert(ev.end(), p.events[det].begin(), p.events[det].end());
    std::sort(ev.begin(), ev.end());
    ev.erase(std::unique(ev.begin(), ev.end()), ev.end());
    std::erase_if(ev, [&](std::int64_t t) { return t < 0 || t > s.duration_ps; });
    if (dead > 0 && !ev.empty()) {
      std::vector<std::int64_t> kept{ev.front()};
      for (std::size_t i = 1; i < ev.size(); ++i) {
        if (ev[i] - kept.back() >= dead) kept.push_back(ev[i]);
      }
      ev = std::move(kept);
    }
  }
  return s;
}

// CSV "detector,timestamp_ps" sorted by timestamp (detector 1 first on ties),
// preceded by a "# seed=..." provenance line.
inline void write_timetags_csv(std::ostream& out, const TimeTagStream& s) {
  out << "# seed=" << s.seed << '\n' << "detector,timestamp_ps\n";
  const auto& a = s.events[0];
  const auto& b = s.events[1];
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j >= b.size() || (i < a.size() && a[i] <= b[j])) {
      out << "1," << a[i++] << '\n';
    } else {
      out << "2," << b[j++] << '\n';
    }
  }
}

}  // namespace ahbt
