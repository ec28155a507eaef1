#pragma once

#include "dpbo/common.hpp"
#include "dpbo/gp.hpp"
#include "dpbo/grid.hpp"
#include "dpbo/kernels.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

// Reference computations and statistical checks. Nothing here calls into the
// production GP, info-gain, or mechanism code it is used to check.
namespace dpbo::verification {

struct NaivePrediction {
  Eigen::VectorXd means;
  Eigen::VectorXd variances;
};

/// Posterior mean/variance by explicitly inverting K_T + sigma^2 I.
NaivePrediction gp_predict_naive(const HyperparamGrid& grid, const KernelParams& params,
                                 const ObservationLog& obs);

/// max over size-T subsets A of 1/2 log det(I + K_A / sigma^2), by enumeration.
double info_gain_exact(const HyperparamGrid& grid, const KernelParams& params,
                       double noise_variance, std::size_t steps);

struct BinSpec {
  enum class Kind { Categorical, Uniform, Quantile };

  Kind kind = Kind::Categorical;
  std::size_t count = 0;
  double lower = 0.0;
  double upper = 0.0;

  /// Outputs are integer labels 0..count-1.
  static BinSpec categorical(std::size_t count);
  /// Equal-width bins over [lower, upper]; values outside land in the end bins.
  static BinSpec uniform(double lower, double upper, std::size_t count);
  /// Equal-mass bins at quantiles of the pooled samples of both mechanisms.
  static BinSpec quantile(std::size_t count);
};

std::string_view to_string(BinSpec::Kind kind);

struct DPTestReport {
  double epsilon_claimed = 0.0;
  double delta_claimed = 0.0;
  BinSpec bins;
  double slack = 0.0;
  /// e^eps (1 + slack).
  double threshold = 0.0;
  double max_ratio_observed = 0.0;
  std::size_t excluded_bins = 0;
  std::size_t sample_count = 0;
  bool pass = false;
};

using Sampler = std::function<double(Rng&)>;

inline constexpr double kDefaultDpSlack = 0.15;

/// Histograms `samples` outputs of each mechanism and takes the largest of
/// (p_V - delta)/p_V' and (p_V' - delta)/p_V over bins, with additive
/// smoothing 1/samples. Bins empty under both mechanisms are skipped.
DPTestReport dp_ratio_test(const Sampler& sample_v, const Sampler& sample_vprime, double epsilon,
                           double delta, std::size_t samples, const BinSpec& bins,
                           double slack = kDefaultDpSlack, std::uint64_t seed = 0);

struct FrequencyReport {
  std::size_t repetitions = 0;
  std::size_t within_bound = 0;
  double fraction = 0.0;
  double target_prob = 0.0;
  bool pass = false;
};

inline constexpr double kBinomialSlack = 0.03;

/// Runs `realized_gap(rep)` for rep = 0..repetitions-1 and passes when the
/// fraction with gap <= bound is at least target_prob - 0.03.
FrequencyReport utility_frequency_test(const std::function<double(std::uint64_t)>& realized_gap,
                                       double bound, double target_prob,
                                       std::size_t repetitions);

}  // namespace dpbo::verification
