#pragma once

// Photon-number moments of Gaussian states.
//
// Normally ordered and antinormally ordered products of ladder operators are
// evaluated with the Gaussian moment (Wick/Isserlis) expansion over complex
// mode operators: every product splits into sums over partitions into
// singletons (first moments <a_i>) and ordered pairs (central second moments
// N_ij = <da_i^dag da_j>, M_ij = <da_i da_j>, plus the commutator for
// antinormal pairs).

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <vector>

#include "ahbt/gaussian_state.hpp"

namespace ahbt {

struct Ladder {
  int mode;
  bool dagger;
};

class MomentTable {
 public:
  explicit MomentTable(const GaussianState& state)
      : modes_(state.mode_count()),
        alpha_(modes_),
        n_(modes_, modes_),
        m_(modes_, modes_) {
    const auto& s = state.covariance();
    for (int i = 0; i < modes_; ++i) {
      alpha_(i) = state.mode_mean(i);
      for (int j = 0; j < modes_; ++j) {
        const double xx = s(2 * i, 2 * j);
        const double pp = s(2 * i + 1, 2 * j + 1);
        const double xp = s(2 * i, 2 * j + 1);
        const double px = s(2 * i + 1, 2 * j);
        const double delta = (i == j) ? 1.0 : 0.0;
        n_(i, j) = 0.5 * cplx(xx + pp - delta, xp - px);
        m_(i, j) = 0.5 * cplx(xx - pp, xp + px);
      }
    }
  }

  int mode_count() const noexcept { return modes_; }

  cplx mean(const Ladder& op) const {
    const cplx a = alpha_(op.mode);
    return op.dagger ? std::conj(a) : a;
  }

  // <dX dY> with X to the left of Y.
  cplx pair(const Ladder& x, const Ladder& y) const {
    if (x.dagger && y.dagger) return std::conj(m_(x.mode, y.mode));
    if (!x.dagger && !y.dagger) return m_(x.mode, y.mode);
    if (x.dagger) return n_(x.mode, y.mode);
    return std::conj(n_(x.mode, y.mode)) + (x.mode == y.mode ? 1.0 : 0.0);
  }

  // Expectation of the ordered product ops[0] ops[1] ... ops[k-1].
  cplx expect(std::span<const Ladder> ops) const {
    for (const auto& op : ops) {
      if (op.mode < 0 || op.mode >= modes_) throw InvalidMode("moment: mode out of range");
    }
    std::vector<Ladder> rest(ops.begin(), ops.end());
    return expand(rest);
  }

  cplx expect(std::initializer_list<Ladder> ops) const {
    return expect(std::span<const Ladder>(ops.begin(), ops.size()));
  }

 private:
  cplx expand(const std::vector<Ladder>& ops) const {
    if (ops.empty()) return 1.0;
    const Ladder head = ops.front();
    std::vector<Ladder> tail(ops.begin() + 1, ops.end());
    cplx total = mean(head) * expand(tail);
    for (std::size_t k = 0; k < tail.size(); ++k) {
      std::vector<Ladder> remaining;
      remaining.reserve(tail.size() - 1);
      for (std::size_t j = 0; j < tail.size(); ++j) {
        if (j != k) remaining.push_back(tail[j]);
      }
      total += pair(head, tail[k]) * expand(remaining);
    }
    return total;
  }

  int modes_;
  Eigen::VectorXcd alpha_;
  Eigen::MatrixXcd n_;
  Eigen::MatrixXcd m_;
};

// <a^dag a> = (Tr sigma_mode - 1) / 2 + |d_mode|^2 / 2.
inline double mean_photon(const GaussianState& state, int mode) {
  state.check_mode(mode);
  const int i = 2 * mode;
  const auto& s = state.covariance();
  const auto& d = state.displacement();
  const double n = 0.5 * (s(i, i) + s(i + 1, i + 1) - 1.0) + 0.5 * (d(i) * d(i) + d(i + 1) * d(i + 1));
  return std::max(n, 0.0);
}

// <n_i n_j>. For i == j this is <n^2>.
inline double photon_number_covariance(const GaussianState& state, int mode_i, int mode_j) {
  state.check_mode(mode_i);
  state.check_mode(mode_j);
  const MomentTable t(state);
  if (mode_i == mode_j) {
    return t.expect({{mode_i, true}, {mode_i, false}, {mode_i, true}, {mode_i, false}}).real();
  }
  return t.expect({{mode_i, true}, {mode_j, true}, {mode_i, false}, {mode_j, false}}).real();
}

// <a a a^dag a^dag> on one mode.
inline double antinormal_fourth_moment(const GaussianState& state, int mode) {
  state.check_mode(mode);
  const MomentTable t(state);
  return t.expect({{mode, false}, {mode, false}, {mode, true}, {mode, true}}).real();
}

// <a a^dag> on one mode.
inline double antinormal_second_moment(const GaussianState& state, int mode) {
  return mean_photon(state, mode) + 1.0;
}

inline constexpr double kMinIntensity = 1e-15;

// g2_{1,2} = <n_1 n_2> / (<n_1> <n_2>).
inline double hbt_correlator(const GaussianState& state, int mode_1, int mode_2) {
  const double n1 = mean_photon(state, mode_1);
  const double n2 = mean_photon(state, mode_2);
  if (n1 <= kMinIntensity || n2 <= kMinIntensity) {
    throw ZeroIntensity("hbt_correlator: mean photon number below " +
                        std::to_string(kMinIntensity) + " on a detector mode");
  }
  return photon_number_covariance(state, mode_1, mode_2) / (n1 * n2);
}

// Single-mode antinormally ordered correlation of a coherent state with mean n,
// <a a a^dag a^dag> / <a a^dag>^2 = (n^2 + 4n + 2) / (n + 1)^2.
inline double antinormal_g2_coherent(double n) {
  return (n * n + 4.0 * n + 2.0) / ((n + 1.0) * (n + 1.0));
}

// Probability that every listed mode is found in vacuum after passing each
// through a pure loss of the given efficiency:
// P0 = exp(-d^T (sigma + I/2)^{-1} d / 2) / sqrt(det(sigma + I/2))
// evaluated on the lossy reduced state.
inline double vacuum_probability(const GaussianState& state, std::span<const int> modes,
                                 std::span<const double> efficiencies) {
  const auto k = static_cast<Eigen::Index>(modes.size());
  if (static_cast<Eigen::Index>(efficiencies.size()) != k) {
    throw std::invalid_argument("vacuum_probability: one efficiency per mode");
  }
  if (k == 0) return 1.0;
  Eigen::VectorXd d(2 * k);
  Eigen::MatrixXd s(2 * k, 2 * k);
  for (Eigen::Index i = 0; i < k; ++i) {
    state.check_mode(modes[i]);
    const double ei = efficiencies[i];
    if (!(ei >= 0.0 && ei <= 1.0)) throw ParameterOutOfRange("vacuum_probability: efficiency");
    d.segment(2 * i, 2) = std::sqrt(ei) * state.displacement().segment(2 * modes[i], 2);
    for (Eigen::Index j = 0; j < k; ++j) {
      const double scale = std::sqrt(ei * efficiencies[j]);
      s.block(2 * i, 2 * j, 2, 2) =
          scale * state.covariance().block(2 * modes[i], 2 * modes[j], 2, 2);
    }
    s.block(2 * i, 2 * i, 2, 2) += 0.5 * (1.0 - ei) * Eigen::Matrix2d::Identity();
  }
  const Eigen::MatrixXd shifted = s + 0.5 * Eigen::MatrixXd::Identity(2 * k, 2 * k);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(shifted);
  const double quad = d.dot(ldlt.solve(d));
  return std::exp(-0.5 * quad) / std::sqrt(shifted.determinant());
}

}  // namespace ahbt
