#pragma once

#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ahbt/gaussian_state.hpp"

namespace ahbt {

// a_out = a cosh r - b^dag e^{i theta} sinh r, b_out = b cosh r - a^dag e^{i theta} sinh r.
struct TwoModeSqueezer {
  int mode_a = 0;
  int mode_b = 1;
  double r = 0.0;
  double theta = 0.0;
};

// a_out = T a + R b, b_out = R a + T b with T = sqrt(t_sq) real and
// R = i sqrt(1 - t_sq), so T R* = -R T*.
struct BeamSplitter {
  int mode_a = 0;
  int mode_b = 1;
  double t_sq = 1.0;
};

// Pure-loss channel with transmissivity eta.
struct Loss {
  int mode = 0;
  double eta = 1.0;
};

// a -> e^{i phi} a.
struct PhaseShift {
  int mode = 0;
  double phi = 0.0;
};

using CircuitElement = std::variant<TwoModeSqueezer, BeamSplitter, Loss, PhaseShift>;

namespace detail {

inline void require_mode(int mode, int mode_count) {
  if (mode < 0 || mode >= mode_count) {
    throw InvalidMode("element mode " + std::to_string(mode) + " invalid for " +
                      std::to_string(mode_count) + " modes");
  }
}

inline void require_distinct(int a, int b) {
  if (a == b) throw InvalidMode("two-mode element needs distinct modes, got " + std::to_string(a));
}

inline void require_unit_interval(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw ParameterOutOfRange(std::string(name) + " = " + std::to_string(x) + " outside [0, 1]");
  }
}

}  // namespace detail

inline void validate(const CircuitElement& element, int mode_count) {
  std::visit(
      [mode_count](const auto& e) {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, TwoModeSqueezer>) {
          detail::require_mode(e.mode_a, mode_count);
          detail::require_mode(e.mode_b, mode_count);
          detail::require_distinct(e.mode_a, e.mode_b);
          if (!(e.r >= 0.0) || !std::isfinite(e.r)) {
            throw ParameterOutOfRange("squeezer r = " + std::to_string(e.r) + " must be >= 0");
          }
          if (!std::isfinite(e.theta)) throw ParameterOutOfRange("squeezer theta not finite");
        } else if constexpr (std::is_same_v<E, BeamSplitter>) {
          detail::require_mode(e.mode_a, mode_count);
          detail::require_mode(e.mode_b, mode_count);
          detail::require_distinct(e.mode_a, e.mode_b);
          detail::require_unit_interval(e.t_sq, "t_sq");
        } else if constexpr (std::is_same_v<E, Loss>) {
          detail::require_mode(e.mode, mode_count);
          detail::require_unit_interval(e.eta, "eta");
        } else {
          detail::require_mode(e.mode, mode_count);
          if (!std::isfinite(e.phi)) throw ParameterOutOfRange("phase phi not finite");
        }
      },
      element);
}

// Symplectic matrix of a loss-free element. Loss has no symplectic
// representation and is rejected.
inline Eigen::MatrixXd element_symplectic(const CircuitElement& element, int mode_count) {
  validate(element, mode_count);
  if (const auto* sq = std::get_if<TwoModeSqueezer>(&element)) {
    const double c = std::cosh(sq->r);
    const cplx s = -std::sinh(sq->r) * std::polar(1.0, sq->theta);
    Eigen::MatrixXcd u(2, 2), v(2, 2);
    u << c, 0.0, 0.0, c;
    v << 0.0, s, s, 0.0;
    const std::array<int, 2> modes{sq->mode_a, sq->mode_b};
    return symplectic_from_bogoliubov(mode_count, modes, u, v);
  }
  if (const auto* bs = std::get_if<BeamSplitter>(&element)) {
    const cplx t = std::sqrt(bs->t_sq);
    const cplx r = cplx(0.0, std::sqrt(1.0 - bs->t_sq));
    Eigen::MatrixXcd u(2, 2);
    u << t, r, r, t;
    const std::array<int, 2> modes{bs->mode_a, bs->mode_b};
    return symplectic_from_bogoliubov(mode_count, modes, u, Eigen::MatrixXcd::Zero(2, 2));
  }
  if (const auto* ph = std::get_if<PhaseShift>(&element)) {
    Eigen::MatrixXcd u(1, 1);
    u << std::polar(1.0, ph->phi);
    const std::array<int, 1> modes{ph->mode};
    return symplectic_from_bogoliubov(mode_count, modes, u, Eigen::MatrixXcd::Zero(1, 1));
  }
  throw std::invalid_argument("element_symplectic: Loss is not a symplectic element");
}

inline GaussianState apply_element(const GaussianState& state, const CircuitElement& element) {
  validate(element, state.mode_count());
  if (const auto* loss = std::get_if<Loss>(&element)) {
    const double eta = loss->eta;
    const double amp = std::sqrt(eta);
    Eigen::VectorXd d = state.displacement();
    Eigen::MatrixXd cov = state.covariance();
    const int i = 2 * loss->mode;
    d.segment(i, 2) *= amp;
    // Rows/columns of the affected mode scale by sqrt(eta); the diagonal block
    // picks up the vacuum admixture.
    cov.middleRows(i, 2) *= amp;
    cov.middleCols(i, 2) *= amp;
    cov.block(i, i, 2, 2) += 0.5 * (1.0 - eta) * Eigen::Matrix2d::Identity();
    return GaussianState(std::move(d), std::move(cov));
  }
  return apply_symplectic(state, element_symplectic(element, state.mode_count()));
}

class Circuit {
 public:
  explicit Circuit(int mode_count) : mode_count_(mode_count) {
    if (mode_count < 1) throw std::invalid_argument("Circuit: mode_count must be >= 1");
  }

  int mode_count() const noexcept { return mode_count_; }
  const std::vector<CircuitElement>& elements() const noexcept { return elements_; }
  const std::map<std::string, int>& labels() const noexcept { return labels_; }

  Circuit& add(CircuitElement element) {
    validate(element, mode_count_);
    elements_.push_back(element);
    return *this;
  }

  // Several labels may name one mode (a_in and a_out, say), but each label
  // names exactly one mode.
  Circuit& label(const std::string& name, int mode) {
    detail::require_mode(mode, mode_count_);
    if (name.empty() || name.find_first_of(" \t=") != std::string::npos) {
      throw std::invalid_argument("Circuit: bad label '" + name + "'");
    }
    auto [it, inserted] = labels_.emplace(name, mode);
    if (!inserted && it->second != mode) {
      throw InvalidMode("label '" + name + "' already bound to mode " + std::to_string(it->second));
    }
    return *this;
  }

  int mode(const std::string& name) const {
    auto it = labels_.find(name);
    if (it == labels_.end()) throw InvalidMode("unknown mode label '" + name + "'");
    return it->second;
  }

  GaussianState run(GaussianState state) const {
    if (state.mode_count() != mode_count_) {
      throw InvalidMode("Circuit::run: state has " + std::to_string(state.mode_count()) +
                        " modes, circuit expects " + std::to_string(mode_count_));
    }
    for (const auto& e : elements_) state = apply_element(state, e);
    return state;
  }

 private:
  int mode_count_;
  std::vector<CircuitElement> elements_;
  std::map<std::string, int> labels_;
};

// Plain-text circuit description, one statement per line:
//
//   modes 5
//   label a_in 0
//   squeezer 0 1 r=0.1 theta=0
//   beamsplitter 1 2 t_sq=0.5
//   loss 1 eta=0.55
//   phase 3 phi=0.25
//
// Blank lines and lines starting with '#' are ignored. Numbers are written
// with round-trip precision.
inline void write_circuit(std::ostream& out, const Circuit& circuit) {
  std::ostringstream os;
  os.precision(17);
  os << "modes " << circuit.mode_count() << '\n';
  for (const auto& [name, mode] : circuit.labels()) os << "label " << name << ' ' << mode << '\n';
  for (const auto& element : circuit.elements()) {
    std::visit(
        [&os](const auto& e) {
          using E = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<E, TwoModeSqueezer>) {
            os << "squeezer " << e.mode_a << ' ' << e.mode_b << " r=" << e.r << " theta=" << e.theta;
          } else if constexpr (std::is_same_v<E, BeamSplitter>) {
            os << "beamsplitter " << e.mode_a << ' ' << e.mode_b << " t_sq=" << e.t_sq;
          } else if constexpr (std::is_same_v<E, Loss>) {
            os << "loss " << e.mode << " eta=" << e.eta;
          } else {
            os << "phase " << e.mode << " phi=" << e.phi;
          }
        },
        element);
    os << '\n';
  }
  out << os.str();
}

namespace detail {

inline double keyed_value(std::istringstream& line, const std::string& key, int lineno) {
  std::string token;
  if (!(line >> token) || token.rfind(key + "=", 0) != 0) {
    throw std::invalid_argument("circuit line " + std::to_string(lineno) + ": expected " + key +
                                "=<value>");
  }
  try {
    std::size_t used = 0;
    const std::string text = token.substr(key.size() + 1);
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::logic_error&) {
    throw std::invalid_argument("circuit line " + std::to_string(lineno) + ": bad number in '" +
                                token + "'");
  }
}

inline int mode_index(std::istringstream& line, int lineno) {
  int m = -1;
  if (!(line >> m)) {
    throw std::invalid_argument("circuit line " + std::to_string(lineno) + ": expected mode index");
  }
  return m;
}

}  // namespace detail

inline Circuit read_circuit(std::istream& in) {
  std::optional<Circuit> circuit;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto first = raw.find_first_not_of(" \t\r");
    if (first == std::string::npos || raw[first] == '#') continue;
    std::istringstream line(raw);
    std::string kind;
    line >> kind;
    if (kind == "modes") {
      if (circuit) throw std::invalid_argument("circuit: duplicate 'modes' line");
      circuit.emplace(detail::mode_index(line, lineno));
      continue;
    }
    if (!circuit) throw std::invalid_argument("circuit: 'modes' must come first");
    if (kind == "label") {
      std::string name;
      line >> name;
      circuit->label(name, detail::mode_index(line, lineno));
    } else if (kind == "squeezer") {
      TwoModeSqueezer e;
      e.mode_a = detail::mode_index(line, lineno);
      e.mode_b = detail::mode_index(line, lineno);
      e.r = detail::keyed_value(line, "r", lineno);
      e.theta = detail::keyed_value(line, "theta", lineno);
      circuit->add(e);
    } else if (kind == "beamsplitter") {
      BeamSplitter e;
      e.mode_a = detail::mode_index(line, lineno);
      e.mode_b = detail::mode_index(line, lineno);
      e.t_sq = detail::keyed_value(line, "t_sq", lineno);
      circuit->add(e);
    } else if (kind == "loss") {
      Loss e;
      e.mode = detail::mode_index(line, lineno);
      e.eta = detail::keyed_value(line, "eta", lineno);
      circuit->add(e);
    } else if (kind == "phase") {
      PhaseShift e;
      e.mode = detail::mode_index(line, lineno);
      e.phi = detail::keyed_value(line, "phi", lineno);
      circuit->add(e);
    } else {
      throw std::invalid_argument("circuit line " + std::to_string(lineno) + ": unknown element '" +
                                  kind + "'");
    }
    std::string extra;
    if (line >> extra) {
      throw std::invalid_argument("circuit line " + std::to_string(lineno) + ": trailing '" + extra +
                                  "'");
    }
  }
  if (!circuit) throw std::invalid_argument("circuit: empty description");
  return *std::move(circuit);
}

// Parameters of the stimulated down-conversion correlator.
struct CorrelatorParams {
  double r = 0.1;       // squeeze parameter (crystal gain times length)
  double theta = 0.0;   // pump phase
  double t_sq = 0.5;    // beam-splitter transmissivity |T|^2
  double eta1 = 0.55;   // total efficiency of detector 1
  double eta2 = 0.55;   // total efficiency of detector 2
  cplx input_amplitude{0.0, 0.0};  // coherent amplitude of the signal mode
};

struct CorrelatorSetup {
  Circuit circuit;
  GaussianState state;  // output state after the full circuit
};

// Modes: a_in=0, b_in=1, v=2, v1=3, v2=4. The squeezer couples a_in and b_in,
// the splitter divides b_out with the empty port v, and each arm then passes
// through a beam splitter of transmissivity eta_k with vacuum v_k. After the
// circuit d1 lives on mode 1 and d2 on mode 2.
inline CorrelatorSetup build_correlator_circuit(const CorrelatorParams& p) {
  Circuit c(5);
  c.label("a_in", 0).label("b_in", 1).label("v", 2).label("v1", 3).label("v2", 4);
  c.label("a_out", 0).label("b_out", 1).label("d1", 1).label("d2", 2);
  c.add(TwoModeSqueezer{0, 1, p.r, p.theta});
  c.add(BeamSplitter{1, 2, p.t_sq});
  c.add(BeamSplitter{1, 3, p.eta1});
  c.add(BeamSplitter{2, 4, p.eta2});
  const std::array<cplx, 5> amps{p.input_amplitude, 0.0, 0.0, 0.0, 0.0};
  GaussianState out = c.run(prepare_coherent(5, amps));
  return {std::move(c), std::move(out)};
}

}  // namespace ahbt
