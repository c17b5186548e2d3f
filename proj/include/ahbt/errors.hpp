#pragma once

#include <stdexcept>
#include <string>

namespace ahbt {

// Bad mode index or mode label.
class InvalidMode : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Physical parameter outside its admissible range (r < 0, t_sq > 1, ...).
class ParameterOutOfRange : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ZeroIntensity : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Carries the measured deficit so callers can decide whether to retry with
// a larger cutoff.
class TruncationBudgetExceeded : public std::runtime_error {
 public:
  TruncationBudgetExceeded(const std::string& what, double deficit)
      : std::runtime_error(what + " (deficit " + std::to_string(deficit) + ")"),
        deficit_(deficit) {}
  double deficit() const noexcept { return deficit_; }

 private:
  double deficit_;
};

class DoubleEfficiencyApplication : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class MarginalMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class OverlappingWindows : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptyNormalization : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ZeroBackground : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DegenerateDesign : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConvergenceFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Config problems always name the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& msg)
      : std::runtime_error(key + ": " + msg), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace ahbt
