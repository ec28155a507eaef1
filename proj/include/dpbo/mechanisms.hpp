#pragma once

#include "dpbo/common.hpp"

#include <cstddef>
#include <vector>

namespace dpbo {

/// Zero-location Laplace distribution with scale b >= 0.
class LaplaceScale {
 public:
  explicit LaplaceScale(double b);
  double value() const noexcept { return b_; }

 private:
  double b_;
};

/// Inverse-CDF sample: -b * sign(u) * ln(1 - 2|u|), u uniform in (-1/2, 1/2).
/// Scale 0 is a point mass and returns exactly 0.
double laplace_sample(const LaplaceScale& scale, Rng& rng);

/// value + Lap(sensitivity / epsilon).
double laplace_release(double value, double sensitivity, double epsilon, Rng& rng);

/// Utility scores q over a candidate set, with their sensitivity and budget.
struct ScoredCandidates {
  std::vector<double> scores;
  double sensitivity = 1.0;
  double epsilon = 1.0;

  void validate() const;
};

/// Selection probabilities exp(eps q_i / (2 Delta)) / Z, normalized by log-sum-exp.
std::vector<double> exponential_probabilities(const ScoredCandidates& cands);

/// Index drawn from the exponential mechanism.
std::size_t exponential_select(const ScoredCandidates& cands, Rng& rng);

}  // namespace dpbo
