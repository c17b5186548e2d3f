#pragma once

// Brute-force state-vector simulation on a truncated multimode Fock basis.
//
// Amplitudes are stored row-major with mode 0 most significant. Every
// operation here is photon-sector preserving (the beam splitter conserves
// n_a + n_b, the two-mode squeezer conserves n_a - n_b), so each unitary is
// applied sector by sector: the sector's block of the truncated generator is
// exponentiated with a scaled Taylor series and applied to every slice of the
// remaining modes. Truncation is never renormalized away; the probability
// weight that the cutoffs cannot represent is accumulated in
// truncation_deficit().

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ahbt/circuit.hpp"
#include "ahbt/errors.hpp"

namespace ahbt {

inline constexpr double kDefaultTruncationBudget = 1e-8;
inline constexpr int kMaxFockCutoff = 40;

class FockState {
 public:
  FockState(std::vector<int> cutoffs, std::vector<cplx> amplitudes, double deficit = 0.0,
            double budget = kDefaultTruncationBudget)
      : cutoffs_(std::move(cutoffs)), amps_(std::move(amplitudes)), deficit_(deficit), budget_(budget) {
    if (cutoffs_.empty()) throw std::invalid_argument("FockState: need at least one mode");
    std::size_t dim = 1;
    for (int c : cutoffs_) {
      if (c < 0) throw std::invalid_argument("FockState: negative cutoff");
      dim *= static_cast<std::size_t>(c + 1);
    }
    if (dim != amps_.size()) throw std::invalid_argument("FockState: amplitude tensor has wrong size");
    for (const auto& a : amps_) {
      if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
        throw std::invalid_argument("FockState: non-finite amplitude");
      }
    }
    strides_.assign(cutoffs_.size(), 1);
    for (int k = static_cast<int>(cutoffs_.size()) - 2; k >= 0; --k) {
      strides_[k] = strides_[k + 1] * static_cast<std::size_t>(cutoffs_[k + 1] + 1);
    }
  }

  int mode_count() const noexcept { return static_cast<int>(cutoffs_.size()); }
  int cutoff(int mode) const { return cutoffs_.at(check(mode)); }
  const std::vector<int>& cutoffs() const noexcept { return cutoffs_; }
  std::size_t stride(int mode) const { return strides_.at(check(mode)); }
  std::size_t size() const noexcept { return amps_.size(); }
  const std::vector<cplx>& amplitudes() const noexcept { return amps_; }
  double truncation_deficit() const noexcept { return deficit_; }
  double budget() const noexcept { return budget_; }

  int occupation(std::size_t flat, int mode) const {
    return static_cast<int>((flat / strides_[mode]) % static_cast<std::size_t>(cutoffs_[mode] + 1));
  }

  double norm_sq() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return s;
  }

  int check(int mode) const {
    if (mode < 0 || mode >= mode_count()) {
      throw InvalidMode("Fock mode " + std::to_string(mode) + " out of range");
    }
    return mode;
  }

 private:
  std::vector<int> cutoffs_;
  std::vector<std::size_t> strides_;
  std::vector<cplx> amps_;
  double deficit_;
  double budget_;
};

// Truncated coherent amplitudes e^{-|b|^2/2} b^n / sqrt(n!), n <= cutoff.
inline std::vector<cplx> coherent_amplitudes(cplx beta, int cutoff) {
  std::vector<cplx> c(static_cast<std::size_t>(cutoff) + 1);
  c[0] = std::exp(-0.5 * std::norm(beta));
  for (int n = 1; n <= cutoff; ++n) c[n] = c[n - 1] * beta / std::sqrt(static_cast<double>(n));
  return c;
}

// Product state from per-mode amplitude vectors; vector k sets cutoff k.
// The missing norm of the truncated factors becomes the initial deficit.
inline FockState fock_product(const std::vector<std::vector<cplx>>& factors,
                              double budget = kDefaultTruncationBudget) {
  std::vector<int> cutoffs;
  std::vector<cplx> amps{1.0};
  double kept = 1.0;
  for (const auto& f : factors) {
    if (f.empty()) throw std::invalid_argument("fock_product: empty factor");
    cutoffs.push_back(static_cast<int>(f.size()) - 1);
    std::vector<cplx> next;
    next.reserve(amps.size() * f.size());
    for (const auto& a : amps) {
      for (const auto& b : f) next.push_back(a * b);
    }
    amps = std::move(next);
    double fn = 0.0;
    for (const auto& b : f) fn += std::norm(b);
    kept *= fn;
  }
  const double deficit = std::max(0.0, 1.0 - kept);
  if (deficit > budget) {
    throw TruncationBudgetExceeded("fock_product: truncated input state", deficit);
  }
  return FockState(std::move(cutoffs), std::move(amps), deficit, budget);
}

inline FockState fock_basis_state(std::vector<int> cutoffs, std::span<const int> occupations,
                                  double budget = kDefaultTruncationBudget) {
  if (occupations.size() != cutoffs.size()) {
    throw std::invalid_argument("fock_basis_state: one occupation per mode");
  }
  std::vector<std::vector<cplx>> factors;
  for (std::size_t k = 0; k < cutoffs.size(); ++k) {
    if (occupations[k] < 0 || occupations[k] > cutoffs[k]) {
      throw std::invalid_argument("fock_basis_state: occupation beyond cutoff");
    }
    std::vector<cplx> f(static_cast<std::size_t>(cutoffs[k]) + 1, 0.0);
    f[occupations[k]] = 1.0;
    factors.push_back(std::move(f));
  }
  return fock_product(factors, budget);
}

inline FockState fock_basis_state(std::vector<int> cutoffs, std::initializer_list<int> occupations) {
  return fock_basis_state(std::move(cutoffs), std::span<const int>(occupations.begin(), occupations.size()));
}

inline FockState fock_vacuum(std::vector<int> cutoffs) {
  std::vector<int> zeros(cutoffs.size(), 0);
  return fock_basis_state(std::move(cutoffs), zeros);
}

// exp(g) by scaling and squaring with a Taylor core; g is small (one sector).
inline Eigen::MatrixXcd expm_scaled_taylor(const Eigen::MatrixXcd& g) {
  const auto n = g.rows();
  const double norm1 = g.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  double scale = 1.0;
  while (norm1 * scale > 0.5) {
    scale *= 0.5;
    ++squarings;
  }
  const Eigen::MatrixXcd a = g * scale;
  Eigen::MatrixXcd result = Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(n, n);
  for (int k = 1; k < 60; ++k) {
    term = term * a / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  for (int k = 0; k < squarings; ++k) result = result * result;
  return result;
}

namespace detail {

struct Sector {
  std::vector<std::pair<int, int>> states;  // (n_a, n_b)
  bool complete = true;                     // no member truncated away
};

// Flat indices whose digits for modes a and b are both zero.
inline std::vector<std::size_t> slice_bases(const FockState& s, int a, int b) {
  std::vector<std::size_t> bases;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.occupation(i, a) == 0 && s.occupation(i, b) == 0) bases.push_back(i);
  }
  return bases;
}

template <class Coupling>
FockState apply_sectorwise(const FockState& state, int a, int b, const std::vector<Sector>& sectors,
                           Coupling coupling, double extra_deficit) {
  const std::size_t sa = state.stride(a);
  const std::size_t sb = state.stride(b);
  const auto bases = slice_bases(state, a, b);
  std::vector<cplx> out(state.amplitudes());
  const auto& in = state.amplitudes();
  for (const auto& sector : sectors) {
    const auto dim = static_cast<Eigen::Index>(sector.states.size());
    if (dim == 0) continue;
    Eigen::MatrixXcd gen = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index j = 0; j < dim; ++j) {
        gen(i, j) = coupling(sector.states[i], sector.states[j]);
      }
    }
    const Eigen::MatrixXcd u = expm_scaled_taylor(gen);
    Eigen::VectorXcd v(dim);
    for (std::size_t base : bases) {
      bool any = false;
      for (Eigen::Index i = 0; i < dim; ++i) {
        const auto [na, nb] = sector.states[i];
        v(i) = in[base + na * sa + nb * sb];
        any = any || v(i) != cplx(0.0);
      }
      if (!any) continue;
      const Eigen::VectorXcd w = u * v;
      for (Eigen::Index i = 0; i < dim; ++i) {
        const auto [na, nb] = sector.states[i];
        out[base + na * sa + nb * sb] = w(i);
      }
    }
  }
  FockState next(state.cutoffs(), std::move(out), state.truncation_deficit() + extra_deficit,
                 state.budget());
  if (next.truncation_deficit() > next.budget()) {
    throw TruncationBudgetExceeded("Fock truncation budget exceeded", next.truncation_deficit());
  }
  return next;
}

inline void check_pair(const FockState& s, int a, int b) {
  s.check(a);
  s.check(b);
  if (a == b) throw InvalidMode("two-mode Fock operation needs distinct modes");
}

}  // namespace detail

// S = exp(xi* a b - xi a^dag b^dag), xi = r e^{i theta}; in the Heisenberg
// picture S^dag a S = a cosh r - b^dag e^{i theta} sinh r.
inline FockState apply_two_mode_squeezer_fock(const FockState& state, int mode_a, int mode_b,
                                              double r, double theta) {
  detail::check_pair(state, mode_a, mode_b);
  if (!(r >= 0.0)) throw ParameterOutOfRange("squeezer r must be >= 0");
  if (r == 0.0) return state;
  const int ca = state.cutoff(mode_a);
  const int cb = state.cutoff(mode_b);
  std::vector<detail::Sector> sectors;
  for (int diff = -cb; diff <= ca; ++diff) {
    detail::Sector s;
    for (int nb = std::max(0, -diff); nb <= cb && nb + diff <= ca; ++nb) s.states.emplace_back(nb + diff, nb);
    sectors.push_back(std::move(s));
  }
  const cplx xi = std::polar(r, theta);
  auto coupling = [xi](std::pair<int, int> to, std::pair<int, int> from) -> cplx {
    const auto [ta, tb] = to;
    const auto [fa, fb] = from;
    if (ta == fa - 1 && tb == fb - 1) return std::conj(xi) * std::sqrt(double(fa) * fb);
    if (ta == fa + 1 && tb == fb + 1) return -xi * std::sqrt(double(fa + 1) * (fb + 1));
    return 0.0;
  };
  FockState next = detail::apply_sectorwise(state, mode_a, mode_b, sectors, coupling, 0.0);
  // Weight parked on the cutoff boundary stands in for what a larger basis
  // would have carried past it.
  double boundary = 0.0;
  for (std::size_t i = 0; i < next.size(); ++i) {
    if (next.occupation(i, mode_a) == ca || next.occupation(i, mode_b) == cb) {
      boundary += std::norm(next.amplitudes()[i]);
    }
  }
  FockState out(next.cutoffs(), next.amplitudes(), state.truncation_deficit() + boundary, state.budget());
  if (out.truncation_deficit() > out.budget()) {
    throw TruncationBudgetExceeded("two-mode squeezer: truncation budget exceeded", out.truncation_deficit());
  }
  return out;
}

// U = exp(i phi (a^dag b + a b^dag)), cos phi = sqrt(t_sq); reproduces the
// Gaussian BeamSplitter convention a -> T a + R b, b -> R a + T b.
inline FockState apply_beam_splitter_fock(const FockState& state, int mode_a, int mode_b, double t_sq) {
  detail::check_pair(state, mode_a, mode_b);
  if (!(t_sq >= 0.0 && t_sq <= 1.0)) throw ParameterOutOfRange("beam splitter t_sq outside [0, 1]");
  const int ca = state.cutoff(mode_a);
  const int cb = state.cutoff(mode_b);
  std::vector<detail::Sector> sectors;
  double incomplete_weight = 0.0;
  for (int total = 0; total <= ca + cb; ++total) {
    detail::Sector s;
    for (int na = std::max(0, total - cb); na <= std::min(ca, total); ++na) s.states.emplace_back(na, total - na);
    s.complete = static_cast<int>(s.states.size()) == total + 1;
    sectors.push_back(std::move(s));
  }
  // Probability in sectors the cutoffs cannot hold completely.
  for (std::size_t i = 0; i < state.size(); ++i) {
    const int total = state.occupation(i, mode_a) + state.occupation(i, mode_b);
    if (!sectors[total].complete) incomplete_weight += std::norm(state.amplitudes()[i]);
  }
  const double phi = std::acos(std::sqrt(t_sq));
  auto coupling = [phi](std::pair<int, int> to, std::pair<int, int> from) -> cplx {
    const auto [ta, tb] = to;
    const auto [fa, fb] = from;
    if (ta == fa + 1 && tb == fb - 1) return cplx(0.0, phi * std::sqrt(double(fa + 1) * fb));
    if (ta == fa - 1 && tb == fb + 1) return cplx(0.0, phi * std::sqrt(double(fa) * (fb + 1)));
    return 0.0;
  };
  return detail::apply_sectorwise(state, mode_a, mode_b, sectors, coupling, incomplete_weight);
}

// Pure loss through an ancilla: a vacuum mode (same cutoff) is appended as
// the last mode and mixed in with transmissivity eta. The ancilla stays in
// the state vector and is traced out by every marginal.
inline FockState apply_loss_fock(const FockState& state, int mode, double eta) {
  state.check(mode);
  if (!(eta >= 0.0 && eta <= 1.0)) throw ParameterOutOfRange("loss eta outside [0, 1]");
  const int c = state.cutoff(mode);
  std::vector<int> cutoffs = state.cutoffs();
  cutoffs.push_back(c);
  std::vector<cplx> amps(state.size() * static_cast<std::size_t>(c + 1), 0.0);
  for (std::size_t i = 0; i < state.size(); ++i) amps[i * static_cast<std::size_t>(c + 1)] = state.amplitudes()[i];
  FockState widened(std::move(cutoffs), std::move(amps), state.truncation_deficit(), state.budget());
  return apply_beam_splitter_fock(widened, mode, widened.mode_count() - 1, eta);
}

inline std::vector<double> fock_marginal(const FockState& state, int mode) {
  state.check(mode);
  std::vector<double> p(static_cast<std::size_t>(state.cutoff(mode)) + 1, 0.0);
  for (std::size_t i = 0; i < state.size(); ++i) p[state.occupation(i, mode)] += std::norm(state.amplitudes()[i]);
  return p;
}

struct JointPnrDistribution {
  int mode_1 = 0;
  int mode_2 = 1;
  Eigen::MatrixXd probability;  // P(n1, n2)
  double truncation_deficit = 0.0;
  // True when detector efficiencies are already part of the photon statistics.
  bool efficiency_included = false;

  double total() const { return probability.sum(); }
};

inline JointPnrDistribution joint_pnr(const FockState& state, int mode_1, int mode_2,
                                      bool efficiency_included = false) {
  detail::check_pair(state, mode_1, mode_2);
  JointPnrDistribution j;
  j.mode_1 = mode_1;
  j.mode_2 = mode_2;
  j.efficiency_included = efficiency_included;
  j.probability = Eigen::MatrixXd::Zero(state.cutoff(mode_1) + 1, state.cutoff(mode_2) + 1);
  for (std::size_t i = 0; i < state.size(); ++i) {
    j.probability(state.occupation(i, mode_1), state.occupation(i, mode_2)) += std::norm(state.amplitudes()[i]);
  }
  j.truncation_deficit = std::max(state.truncation_deficit(), 1.0 - j.total());
  return j;
}

inline double fock_mean_photon(const FockState& state, int mode) {
  const auto p = fock_marginal(state, mode);
  double s = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) s += static_cast<double>(n) * p[n];
  return s;
}

// <n_i n_j>; <n^2> when i == j.
inline double fock_number_correlation(const FockState& state, int mode_i, int mode_j) {
  state.check(mode_i);
  state.check(mode_j);
  double s = 0.0;
  for (std::size_t k = 0; k < state.size(); ++k) {
    s += static_cast<double>(state.occupation(k, mode_i)) * state.occupation(k, mode_j) *
         std::norm(state.amplitudes()[k]);
  }
  return s;
}

// <a a a^dag a^dag> = sum_n (n+1)(n+2) P(n).
inline double antinormal_fourth_moment(const FockState& state, int mode) {
  if (state.truncation_deficit() > state.budget()) {
    throw TruncationBudgetExceeded("antinormal moment: state over budget", state.truncation_deficit());
  }
  const auto p = fock_marginal(state, mode);
  // Two creation operators need two levels of headroom above the occupied part.
  const std::size_t c = p.size() - 1;
  const double top = p[c] + (c >= 1 ? p[c - 1] : 0.0);
  if (top > state.budget()) {
    throw TruncationBudgetExceeded("antinormal moment: weight within two levels of the cutoff", top);
  }
  double s = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) s += double(n + 1) * double(n + 2) * p[n];
  return s;
}

inline double fock_hbt_correlator(const FockState& state, int mode_1, int mode_2) {
  const double n1 = fock_mean_photon(state, mode_1);
  const double n2 = fock_mean_photon(state, mode_2);
  if (n1 <= 1e-15 || n2 <= 1e-15) throw ZeroIntensity("fock_hbt_correlator: zero intensity");
  return fock_number_correlation(state, mode_1, mode_2) / (n1 * n2);
}

// Photon-number distribution of a displaced thermal state (thermal mean
// nbar, coherent part |d|^2 = coherent_mean), n = 0..n_max.
inline std::vector<double> displaced_thermal_distribution(double nbar, double coherent_mean, int n_max) {
  std::vector<double> p(static_cast<std::size_t>(n_max) + 1, 0.0);
  const double q = nbar / (1.0 + nbar);
  const double y = coherent_mean / ((1.0 + nbar) * (1.0 + nbar));
  const double pref = std::exp(-coherent_mean / (1.0 + nbar)) / (1.0 + nbar);
  for (int n = 0; n <= n_max; ++n) {
    // sum_k C(n,k) q^{n-k} y^k / k!, all terms positive.
    double s = 0.0;
    for (int k = 0; k <= n; ++k) {
      if ((n - k > 0 && q == 0.0) || (k > 0 && y == 0.0)) continue;
      double log_term = std::lgamma(n + 1.0) - std::lgamma(n - k + 1.0) - 2.0 * std::lgamma(k + 1.0);
      if (n - k > 0) log_term += (n - k) * std::log(q);
      if (k > 0) log_term += k * std::log(y);
      s += std::exp(log_term);
    }
    p[n] = pref * s;
  }
  return p;
}

// Smallest cutoff c with P(N >= c) below tol, so that both the weight beyond
// the basis and the weight parked on its boundary level stay under tol.
inline int choose_cutoff(double nbar, double coherent_mean, double tol, int cap = kMaxFockCutoff) {
  const int horizon = cap + 200;
  const auto p = displaced_thermal_distribution(nbar, coherent_mean, horizon);
  double tail = 0.0;
  std::vector<double> tails(p.size(), 0.0);
  for (int n = horizon; n >= 0; --n) {
    tail += p[n];
    tails[n] = tail;  // weight at or above n
  }
  for (int c = 0; c <= cap; ++c) {
    if (tails[c] < tol) return c;
  }
  throw TruncationBudgetExceeded("choose_cutoff: cutoff above cap " + std::to_string(cap), tails[cap]);
}

struct FockCorrelator {
  FockState state;
  int d1 = 1;
  int d2 = 2;
  bool efficiency_included = true;
};

// Fock-basis counterpart of build_correlator_circuit. With
// include_efficiency == false the detector losses are left out, so the joint
// distribution of (d1, d2) is the pre-detection one.
inline FockCorrelator build_correlator_fock(const CorrelatorParams& p, bool include_efficiency = true,
                                            double budget = kDefaultTruncationBudget) {
  validate(TwoModeSqueezer{0, 1, p.r, p.theta}, 2);
  validate(BeamSplitter{0, 1, p.t_sq}, 2);
  validate(Loss{0, p.eta1}, 1);
  validate(Loss{0, p.eta2}, 1);
  const double n = std::norm(p.input_amplitude);
  const double sh2 = std::sinh(p.r) * std::sinh(p.r);
  const double ch2 = 1.0 + sh2;
  // Boundary weight is booked once per mode pair touched by the squeezer.
  const double mode_tol = budget / 4.0;
  const int ca = std::max(choose_cutoff(0.0, n, mode_tol), choose_cutoff(sh2, n * ch2, mode_tol));
  const int cb = std::max(1, choose_cutoff(sh2, n * sh2, mode_tol));
  std::vector<std::vector<cplx>> factors{coherent_amplitudes(p.input_amplitude, ca),
                                         coherent_amplitudes(0.0, cb), coherent_amplitudes(0.0, cb)};
  FockState s = fock_product(factors, budget);
  s = apply_two_mode_squeezer_fock(s, 0, 1, p.r, p.theta);
  s = apply_beam_splitter_fock(s, 1, 2, p.t_sq);
  if (include_efficiency) {
    s = apply_loss_fock(s, 1, p.eta1);
    s = apply_loss_fock(s, 2, p.eta2);
  }
  return {std::move(s), 1, 2, include_efficiency};
}

}  // namespace ahbt
