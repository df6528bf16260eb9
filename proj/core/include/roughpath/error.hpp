#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace roughpath {

enum class ErrorKind {
  kShape,
  kDomain,
  kNotGroupElement,
  kInvalidPartition,
  kIllPosed,
  kDerivativeOrder,
  kRegularity,
  kNonConvergence,
  kHypothesis,
  kConfig,
  kIo,
};

/// Stable lower-case identifier used in machine-readable error records.
std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

/// Picard iteration failed; carries the last measured residual.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double residual)
      : Error(ErrorKind::kNonConvergence, what), residual_(residual) {}

  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace roughpath
