#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sbmem {

// Parameter or argument rejected before any computation started.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

class NonConvergedQuadrature : public std::runtime_error {
 public:
  NonConvergedQuadrature(const std::string& what, double estimate, double error)
      : std::runtime_error(what), estimate_(estimate), error_(error) {}
  double estimate() const noexcept { return estimate_; }
  double error() const noexcept { return error_; }

 private:
  double estimate_;
  double error_;
};

class NegativeRate : public std::runtime_error {
 public:
  NegativeRate(const std::string& what, double value)
      : std::runtime_error(what), value_(value) {}
  double value() const noexcept { return value_; }

 private:
  double value_;
};

class OutOfBounds : public std::out_of_range {
 public:
  explicit OutOfBounds(const std::string& what) : std::out_of_range(what) {}
};

class ZeroTotalRate : public std::runtime_error {
 public:
  explicit ZeroTotalRate(const std::string& what) : std::runtime_error(what) {}
};

// Stationarity detector tripped: the two halves of the measurement window
// disagree by more than the drift tolerance.
class NotConverged : public std::runtime_error {
 public:
  NotConverged(const std::string& what, double first_half, double second_half)
      : std::runtime_error(what), first_half_(first_half), second_half_(second_half) {}
  double first_half() const noexcept { return first_half_; }
  double second_half() const noexcept { return second_half_; }

 private:
  double first_half_;
  double second_half_;
};

// Collects every violation found while validating a configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : std::runtime_error(join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) {
      if (!out.empty()) out += "\n";
      out += s;
    }
    return out;
  }
  std::vector<std::string> violations_;
};

}  // namespace sbmem
