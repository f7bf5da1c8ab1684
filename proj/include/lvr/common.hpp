#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lvr {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

enum class ErrorKind {
  CutProximity,
  BranchPointProximity,
  NonConvergence,
  BranchViolation,
  CutCrossing,
  CutCollision,
  SpectrumTooLarge,
  QuadratureDivergence,
  NonHermitian,
  NotPSD,
  LogBranchAmbiguity,
  PoleCollision,
  VarianceBlowup,
  QuadratureUnderResolved,
  OutOfRange,
  BudgetExceeded,
  StepInstability,
  InvalidArgument,
};

const char* to_string(ErrorKind kind);

/// Every numerical failure in the library is reported through this type; the
/// kind names the violated precondition.
class NumericError : public std::runtime_error {
 public:
  NumericError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// z^n for small non-negative integer n by repeated squaring.
template <typename T>
T ipow(T z, int n) {
  T result{1.0};
  while (n > 0) {
    if (n & 1) result *= z;
    z *= z;
    n >>= 1;
  }
  return result;
}

}  // namespace lvr
