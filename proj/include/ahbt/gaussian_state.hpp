#pragma once

// Gaussian bosonic states in the quadrature picture.
//
// Conventions used throughout the library:
//   * quadrature ordering x1, p1, x2, p2, ...
//   * a = (x + i p) / sqrt(2), [x, p] = i
//   * the covariance is the symmetrized one, sigma_kl = <{dr_k, dr_l}> / 2,
//     so the vacuum has sigma = I / 2.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "ahbt/errors.hpp"

namespace ahbt {

using cplx = std::complex<double>;

class GaussianState {
 public:
  explicit GaussianState(int mode_count)
      : modes_(check_modes(mode_count)),
        mean_(Eigen::VectorXd::Zero(2 * mode_count)),
        cov_(0.5 * Eigen::MatrixXd::Identity(2 * mode_count, 2 * mode_count)) {}

  GaussianState(Eigen::VectorXd displacement, Eigen::MatrixXd covariance)
      : modes_(static_cast<int>(displacement.size() / 2)),
        mean_(std::move(displacement)),
        cov_(std::move(covariance)) {
    if (mean_.size() == 0 || mean_.size() % 2 != 0 || cov_.rows() != mean_.size() ||
        cov_.cols() != mean_.size()) {
      throw std::invalid_argument("GaussianState: inconsistent displacement/covariance shapes");
    }
  }

  int mode_count() const noexcept { return modes_; }
  const Eigen::VectorXd& displacement() const noexcept { return mean_; }
  const Eigen::MatrixXd& covariance() const noexcept { return cov_; }

  void check_mode(int mode) const {
    if (mode < 0 || mode >= modes_) {
      throw InvalidMode("mode index " + std::to_string(mode) + " out of range [0, " +
                        std::to_string(modes_) + ")");
    }
  }

  // <a_mode>
  cplx mode_mean(int mode) const {
    check_mode(mode);
    return cplx(mean_(2 * mode), mean_(2 * mode + 1)) / std::sqrt(2.0);
  }

  double max_asymmetry() const { return (cov_ - cov_.transpose()).cwiseAbs().maxCoeff(); }

 private:
  static int check_modes(int m) {
    if (m < 1) throw std::invalid_argument("GaussianState: mode_count must be >= 1");
    return m;
  }

  int modes_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
};

// Standard symplectic form for the interleaved (x, p) ordering.
inline Eigen::MatrixXd symplectic_form(int mode_count) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * mode_count, 2 * mode_count);
  for (int k = 0; k < mode_count; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

// Sorted ascending. Each value appears once (the +/- pairs of i*Omega*sigma
// are folded together).
inline std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd& covariance) {
  const int n = static_cast<int>(covariance.rows() / 2);
  const Eigen::MatrixXd sym = 0.5 * (covariance + covariance.transpose());
  Eigen::EigenSolver<Eigen::MatrixXd> solver(symplectic_form(n) * sym, false);
  std::vector<double> all;
  all.reserve(2 * n);
  for (int k = 0; k < 2 * n; ++k) all.push_back(std::abs(solver.eigenvalues()(k)));
  std::sort(all.begin(), all.end());
  std::vector<double> nu;
  nu.reserve(n);
  for (int k = 0; k < 2 * n; k += 2) nu.push_back(0.5 * (all[k] + all[k + 1]));
  return nu;
}

inline std::vector<double> symplectic_eigenvalues(const GaussianState& state) {
  return symplectic_eigenvalues(state.covariance());
}

// Uncertainty principle sigma + i Omega / 2 >= 0, checked through the
// symplectic spectrum.
inline bool is_physical(const GaussianState& state, double tol = 1e-9) {
  if (state.max_asymmetry() > 1e-12) return false;
  const auto nu = symplectic_eigenvalues(state);
  return nu.front() >= 0.5 - tol;
}

inline GaussianState vacuum_state(int mode_count) { return GaussianState(mode_count); }

// Product of coherent states |beta_k>. amplitudes.size() must equal mode_count.
inline GaussianState prepare_coherent(int mode_count, std::span<const cplx> amplitudes) {
  if (mode_count < 1) throw std::invalid_argument("prepare_coherent: mode_count must be >= 1");
  if (static_cast<int>(amplitudes.size()) != mode_count) {
    throw std::invalid_argument("prepare_coherent: need one amplitude per mode");
  }
  Eigen::VectorXd d = Eigen::VectorXd::Zero(2 * mode_count);
  for (int k = 0; k < mode_count; ++k) {
    d(2 * k) = std::sqrt(2.0) * amplitudes[k].real();
    d(2 * k + 1) = std::sqrt(2.0) * amplitudes[k].imag();
  }
  return GaussianState(std::move(d),
                       0.5 * Eigen::MatrixXd::Identity(2 * mode_count, 2 * mode_count));
}

inline GaussianState prepare_coherent(int mode_count, std::initializer_list<cplx> amplitudes) {
  return prepare_coherent(mode_count, std::span<const cplx>(amplitudes.begin(), amplitudes.size()));
}

// Real symplectic matrix of the linear Bogoliubov map a'_k = sum_l U_kl a_l + V_kl a_l^dag,
// restricted to the listed modes and embedded as identity elsewhere.
inline Eigen::MatrixXd symplectic_from_bogoliubov(int mode_count, std::span<const int> modes,
                                                  const Eigen::MatrixXcd& u,
                                                  const Eigen::MatrixXcd& v) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(2 * mode_count, 2 * mode_count);
  const auto k = static_cast<Eigen::Index>(modes.size());
  for (Eigen::Index i = 0; i < k; ++i) {
    const int row = modes[i];
    for (Eigen::Index j = 0; j < k; ++j) {
      const int col = modes[j];
      const cplx plus = u(i, j) + v(i, j);
      const cplx minus = u(i, j) - v(i, j);
      s(2 * row, 2 * col) = plus.real();
      s(2 * row, 2 * col + 1) = -minus.imag();
      s(2 * row + 1, 2 * col) = plus.imag();
      s(2 * row + 1, 2 * col + 1) = minus.real();
    }
  }
  return s;
}

inline GaussianState apply_symplectic(const GaussianState& state, const Eigen::MatrixXd& s) {
  Eigen::MatrixXd cov = s * state.covariance() * s.transpose();
  cov = 0.5 * (cov + cov.transpose());
  return GaussianState(s * state.displacement(), std::move(cov));
}

}  // namespace ahbt
