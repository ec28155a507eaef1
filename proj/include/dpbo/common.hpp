#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dpbo {

/// Raised when a covariance matrix cannot be Cholesky-factored even after jitter.
class SingularModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an iterative solver stops before reaching its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double final_gradient_norm)
      : std::runtime_error(what), final_gradient_norm_(final_gradient_norm) {}

  double final_gradient_norm() const noexcept { return final_gradient_norm_; }

 private:
  double final_gradient_norm_;
};

/// The single random engine used by every stochastic routine. Every sampler
/// takes it by reference; nothing in the library owns a hidden global state.
using Rng = std::mt19937_64;

/// Uniform draw in the open interval (0, 1) built from the top 53 bits, so the
/// value is identical on every standard library implementation.
inline double uniform_open01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

using WarningHandler = std::function<void(std::string_view)>;

/// Replaces the warning sink (default: one line on stderr). Returns the old one.
WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace dpbo
