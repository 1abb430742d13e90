#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lqft {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Error categories. The CLI maps them onto exit codes.
enum class ErrorKind {
  domain,         // math precondition violated (coincident points, |x| >= 1, ...)
  parameter,      // parameter outside its allowed range
  config,         // malformed or inconsistent configuration
  unsupported,    // configuration outside the exact-formula regime
  admissibility,  // Seiberg bounds fail
  factorization,  // covariance not numerically PSD
  numeric         // quadrature/sampling failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace lqft
