#include "dpbo/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpbo {

LaplaceScale::LaplaceScale(double b) : b_(b) {
  if (!(b >= 0.0) || !std::isfinite(b)) {
    throw std::invalid_argument("Laplace scale must be finite and >= 0");
  }
}

double laplace_sample(const LaplaceScale& scale, Rng& rng) {
  // Draw even for b = 0 so the generator advances identically for every scale.
  const double u = uniform_open01(rng) - 0.5;
  if (scale.value() == 0.0) return 0.0;
  const double magnitude = -scale.value() * std::log1p(-2.0 * std::abs(u));
  return u < 0.0 ? -magnitude : magnitude;
}

double laplace_release(double value, double sensitivity, double epsilon, Rng& rng) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("laplace_release: epsilon must be > 0");
  if (!(sensitivity >= 0.0)) throw std::invalid_argument("laplace_release: sensitivity must be >= 0");
  return value + laplace_sample(LaplaceScale(sensitivity / epsilon), rng);
}

void ScoredCandidates::validate() const {
  if (scores.empty()) throw std::invalid_argument("exponential mechanism: no candidates");
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
    throw std::invalid_argument("exponential mechanism: sensitivity must be > 0");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("exponential mechanism: epsilon must be > 0");
  for (double s : scores) {
    if (!std::isfinite(s)) throw std::invalid_argument("exponential mechanism: non-finite score");
  }
}

std::vector<double> exponential_probabilities(const ScoredCandidates& cands) {
  cands.validate();
  const double factor = cands.epsilon / (2.0 * cands.sensitivity);
  std::vector<double> logits(cands.scores.size());
  std::transform(cands.scores.begin(), cands.scores.end(), logits.begin(),
                 [factor](double s) { return factor * s; });
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& l : logits) {
    l = std::exp(l - top);
    total += l;
  }
  for (double& l : logits) l /= total;
  return logits;
}

std::size_t exponential_select(const ScoredCandidates& cands, Rng& rng) {
  const auto probs = exponential_probabilities(cands);
  const double u = uniform_open01(rng);
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cumulative += probs[i];
    if (u < cumulative) return i;
  }
  // Rounding left the cumulative sum just below 1; return the last positive entry.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return i;
  }
  return probs.size() - 1;
}

}  // namespace dpbo
