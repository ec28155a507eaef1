#pragma once

#include "dpbo/gp.hpp"
#include "dpbo/grid.hpp"
#include "dpbo/kernels.hpp"

#include <cstddef>
#include <string_view>
#include <vector>

namespace dpbo {

/// Exploration schedule beta_t = 2 log(|grid| t^2 pi^2 / (3 delta)).
struct BetaSchedule {
  std::size_t grid_size = 1;
  double delta = 0.1;

  void validate() const;
};

/// beta_t for t >= 1. Clamped to 0 (with a warning) when the log argument is <= 1.
double beta(std::size_t t, const BetaSchedule& schedule);

/// argmax_i mean_i + sqrt(beta) * stddev_i, ties going to the lowest index.
std::size_t ucb_select(const GPPosterior& post, double beta);
std::size_t ucb_select(const Eigen::VectorXd& means, const Eigen::VectorXd& variances, double beta);

/// Expected improvement over `incumbent`, argmax with lowest-index ties.
std::size_t expected_improvement_select(const GPPosterior& post, double incumbent);

enum class InfoGainMethod { GreedyScaled, ExactBruteForce };
std::string_view to_string(InfoGainMethod method);

struct InfoGainBound {
  double gamma_T = 0.0;
  InfoGainMethod method = InfoGainMethod::GreedyScaled;
};

/// Trace of greedy log-det maximization. Points are chosen without
/// replacement until the grid is exhausted, then with replacement.
struct GreedyInfoGain {
  std::vector<std::size_t> selected;
  std::vector<double> marginal_gains;
  double total = 0.0;
};

GreedyInfoGain greedy_info_gain(const HyperparamGrid& grid, const KernelParams& params,
                                double noise_variance, std::size_t steps);

/// Maximum information gain gamma_T. GreedyScaled returns greedy/(1 - 1/e),
/// an upper bound by submodularity. ExactBruteForce enumerates all subsets
/// and is limited to |grid| <= 12 and T <= 6.
InfoGainBound info_gain(const HyperparamGrid& grid, const KernelParams& params,
                        double noise_variance, std::size_t steps,
                        InfoGainMethod method = InfoGainMethod::GreedyScaled);

inline constexpr std::size_t kExactInfoGainMaxGrid = 12;
inline constexpr std::size_t kExactInfoGainMaxSteps = 6;

}  // namespace dpbo
