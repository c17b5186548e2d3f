#pragma once

#include <cmath>
#include <limits>

#include "ahbt/errors.hpp"

namespace ahbt {

namespace detail {

inline constexpr int kGammaMaxIterations = 1000;
inline constexpr double kGammaEps = 1e-16;

// P(a, x) by its power series; converges quickly for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kGammaMaxIterations; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaEps) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw ConvergenceFailure("incomplete gamma series did not converge");
}

// Q(a, x) by the Legendre continued fraction (modified Lentz); for x >= a + 1.
inline double gamma_q_continued_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kGammaEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaEps) return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
  }
  throw ConvergenceFailure("incomplete gamma continued fraction did not converge");
}

}  // namespace detail

// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
inline double gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) throw std::domain_error("gamma_q: need a > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_continued_fraction(a, x);
}

inline double gamma_p(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) throw std::domain_error("gamma_p: need a > 0 and x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_continued_fraction(a, x);
}

// Upper-tail probability of the chi-square distribution with dof degrees of
// freedom.
inline double chi2_tail(double s, int dof) {
  if (!(s >= 0.0)) throw std::domain_error("chi2_tail: statistic must be >= 0");
  if (dof < 1) throw std::domain_error("chi2_tail: dof must be >= 1");
  return gamma_q(0.5 * dof, 0.5 * s);
}

inline double chi2_cdf(double s, int dof) {
  if (!(s >= 0.0)) throw std::domain_error("chi2_cdf: statistic must be >= 0");
  if (dof < 1) throw std::domain_error("chi2_cdf: dof must be >= 1");
  return gamma_p(0.5 * dof, 0.5 * s);
}

// Threshold s with chi2_tail(s, dof) = upper_tail, by bisection to 1e-10.
inline double chi2_quantile(double upper_tail, int dof) {
  if (!(upper_tail > 0.0 && upper_tail < 1.0)) throw std::domain_error("chi2_quantile: need 0 < p < 1");
  if (dof < 1) throw std::domain_error("chi2_quantile: dof must be >= 1");
  double lo = 0.0;
  double hi = std::max(1.0, 2.0 * dof);
  int grow = 0;
  while (chi2_tail(hi, dof) > upper_tail) {
    lo = hi;
    hi *= 2.0;
    if (++grow > 200) throw ConvergenceFailure("chi2_quantile: could not bracket the quantile");
  }
  for (int i = 0; i < 500; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_tail(mid, dof) > upper_tail) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-10) return 0.5 * (lo + hi);
  }
  throw ConvergenceFailure("chi2_quantile: bisection did not converge");
}

}  // namespace ahbt
