#pragma once

// Indistinguishability model of the zero-delay antinormal correlation, its
// weighted least-squares fit, and the chi-square goodness-of-fit test.

#include <cmath>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ahbt/errors.hpp"
#include "ahbt/special_functions.hpp"

namespace ahbt {

// Bunching excess of a single-mode coherent input, 1/(n+1) + n/(n+1)^2.
inline double bunching_excess(double n) {
  if (!(n >= 0.0)) throw std::domain_error("bunching_excess: n must be >= 0");
  const double m = n + 1.0;
  return 1.0 / m + n / (m * m);
}

// g0 = 1 + alpha [1/(n+1) + n/(n+1)^2]. alpha outside [0, 1] is allowed so that
// unconstrained fits can evaluate it.
inline double model_g(double n, double alpha) { return 1.0 + alpha * bunching_excess(n); }

struct DataPoint {
  double n = 0.0;
  double sigma_n = 0.0;  // carried for reporting, not used by the fit
  double g = 0.0;
  double sigma_g = 0.0;
};

struct FitResult {
  double alpha_hat = 0.0;
  double alpha_sigma = 0.0;  // 1 / sqrt(sum w f^2)
  double s_min = 0.0;
  int dof = 0;
  double threshold = 0.0;   // chi-square upper-5% point for dof
  double p_value = 1.0;
  bool passed = false;
  bool alpha_in_range = true;  // alpha_hat within [0, 1]
  std::vector<double> residuals;  // (g - model) / sigma_g
};

inline constexpr double kGoodnessTail = 0.05;

inline double fit_statistic(const std::vector<DataPoint>& points, double alpha) {
  double s = 0.0;
  for (const auto& p : points) {
    const double r = (p.g - model_g(p.n, alpha)) / p.sigma_g;
    s += r * r;
  }
  return s;
}

namespace detail {

inline void check_points(const std::vector<DataPoint>& points) {
  if (points.size() < 2) throw std::invalid_argument("fit_alpha: need at least two points");
  for (const auto& p : points) {
    if (!(p.sigma_g > 0.0)) throw std::invalid_argument("fit_alpha: sigma_g must be > 0");
    if (!(p.n >= 0.0) || !std::isfinite(p.n)) throw std::invalid_argument("fit_alpha: n must be finite and >= 0");
    if (!std::isfinite(p.g)) throw std::invalid_argument("fit_alpha: g must be finite");
  }
}

}  // namespace detail

struct GoodnessOfFit {
  double s_min = 0.0;
  int dof = 0;
  double threshold = 0.0;
  double p_value = 1.0;
  bool passed = false;
};

inline GoodnessOfFit goodness_of_fit(double s_min, int dof, double upper_tail = kGoodnessTail) {
  GoodnessOfFit v;
  v.s_min = s_min;
  v.dof = dof;
  v.threshold = chi2_quantile(upper_tail, dof);
  v.p_value = chi2_tail(s_min, dof);
  v.passed = s_min <= v.threshold;
  return v;
}

inline GoodnessOfFit goodness_of_fit(const FitResult& fit, double upper_tail = kGoodnessTail) {
  return goodness_of_fit(fit.s_min, fit.dof, upper_tail);
}

// The model is affine in alpha, so the minimizer of
// s(alpha) = sum w_i (y_i - 1 - alpha f_i)^2 is
// alpha = sum w_i (y_i - 1) f_i / sum w_i f_i^2 with w_i = 1 / sigma_i^2.
// Horizontal uncertainties are ignored.
inline FitResult fit_alpha(const std::vector<DataPoint>& points, double upper_tail = kGoodnessTail) {
  detail::check_points(points);
  double num = 0.0;
  double den = 0.0;
  for (const auto& p : points) {
    const double w = 1.0 / (p.sigma_g * p.sigma_g);
    const double f = bunching_excess(p.n);
    num += w * (p.g - 1.0) * f;
    den += w * f * f;
  }
  if (!(den > 0.0)) throw DegenerateDesign("fit_alpha: sum of w f^2 vanishes");
  FitResult r;
  r.alpha_hat = num / den;
  r.alpha_sigma = 1.0 / std::sqrt(den);
  r.alpha_in_range = r.alpha_hat >= 0.0 && r.alpha_hat <= 1.0;
  r.s_min = fit_statistic(points, r.alpha_hat);
  r.dof = static_cast<int>(points.size()) - 1;
  for (const auto& p : points) r.residuals.push_back((p.g - model_g(p.n, r.alpha_hat)) / p.sigma_g);
  const auto gof = goodness_of_fit(r.s_min, r.dof, upper_tail);
  r.threshold = gof.threshold;
  r.p_value = gof.p_value;
  r.passed = gof.passed;
  return r;
}

// Golden-section minimum of a unimodal function on [lo, hi].
inline double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                                      double tol = 1e-12) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < 400 && (b - a) > tol; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Numerical minimizer of the fit statistic, used to cross-check fit_alpha.
// Comparing function values only resolves the minimum to about sqrt(eps), so
// the golden-section estimate is polished with parabolic steps through three
// well-separated points.
inline double fit_alpha_numeric(const std::vector<DataPoint>& points, double lo = -10.0, double hi = 10.0) {
  detail::check_points(points);
  auto s = [&](double a) { return fit_statistic(points, a); };
  double x = golden_section_minimize(s, lo, hi, 1e-9);
  for (int step = 0; step < 3; ++step) {
    const double h = 1e-2 * std::max(1.0, std::abs(x));
    const double fa = s(x - h), fb = s(x), fc = s(x + h);
    const double curvature = fa - 2.0 * fb + fc;
    if (!(curvature > 0.0)) break;
    x -= 0.5 * h * (fc - fa) / curvature;
  }
  return x;
}

// CSV "n,sigma_n,g,sigma_g"; blank lines and '#' comments are skipped.
inline std::vector<DataPoint> read_data_points(std::istream& in) {
  std::vector<DataPoint> points;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    if (!header_seen) {
      if (line != "n,sigma_n,g,sigma_g") {
        throw std::invalid_argument("data CSV line " + std::to_string(lineno) + ": expected header n,sigma_n,g,sigma_g");
      }
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    DataPoint p;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(row >> p.n >> c1 >> p.sigma_n >> c2 >> p.g >> c3 >> p.sigma_g) || c1 != ',' || c2 != ',' || c3 != ',') {
      throw std::invalid_argument("data CSV line " + std::to_string(lineno) + ": malformed row");
    }
    std::string rest;
    if (row >> rest) throw std::invalid_argument("data CSV line " + std::to_string(lineno) + ": extra columns");
    points.push_back(p);
  }
  if (!header_seen) throw std::invalid_argument("data CSV: missing header");
  return points;
}

inline void write_data_points(std::ostream& out, const std::vector<DataPoint>& points) {
  std::ostringstream os;
  os.precision(17);
  os << "n,sigma_n,g,sigma_g\n";
  for (const auto& p : points) os << p.n << ',' << p.sigma_n << ',' << p.g << ',' << p.sigma_g << '\n';
  out << os.str();
}

// Key/value summary followed by a per-point residual table.
inline void write_fit_report(std::ostream& out, const FitResult& fit, const std::vector<DataPoint>& points) {
  std::ostringstream os;
  os.precision(10);
  os << "key,value\n";
  os << "alpha_hat," << fit.alpha_hat << '\n';
  os << "alpha_sigma," << fit.alpha_sigma << '\n';
  os << "s_min," << fit.s_min << '\n';
  os << "dof," << fit.dof << '\n';
  os << "threshold," << fit.threshold << '\n';
  os << "p_value," << fit.p_value << '\n';
  os << "passed," << (fit.passed ? "true" : "false") << '\n';
  os << "alpha_in_range," << (fit.alpha_in_range ? "true" : "false") << '\n';
  os << '\n' << "n,g,sigma_g,model,residual\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    os << points[i].n << ',' << points[i].g << ',' << points[i].sigma_g << ','
       << model_g(points[i].n, fit.alpha_hat) << ',' << fit.residuals[i] << '\n';
  }
  out << os.str();
}

}  // namespace ahbt
