#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace matbern {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Jacobi sweeps exhausted before the off-diagonal mass fell below threshold.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// Argument outside the mathematical domain of the operation
// (non-PSD where PSD is required, non-finite entries, asymmetric input...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Scalar parameter constraint violated, e.g. 0 < ct < 1.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Caller asked for something whose hypothesis is not certified.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// All validation problems found in a config, not just the first.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : Error(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& problems) {
    std::string out;
    for (const auto& p : problems) {
      if (!out.empty()) out += '\n';
      out += p;
    }
    return out;
  }
  std::vector<std::string> problems_;
};

}  // namespace matbern
