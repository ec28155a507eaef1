#include "dpbo/acquisition.hpp"

#include "dpbo/common.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace dpbo {

void BetaSchedule::validate() const {
  if (grid_size < 1) throw std::invalid_argument("beta schedule: grid size must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("beta schedule: delta must lie in (0, 1)");
}

double beta(std::size_t t, const BetaSchedule& schedule) {
  if (t < 1) throw std::invalid_argument("beta: step t must be >= 1");
  if (!(schedule.delta > 0.0)) throw std::invalid_argument("beta: delta must be positive");
  if (schedule.grid_size < 1) throw std::invalid_argument("beta: grid size must be >= 1");
  const double td = static_cast<double>(t);
  const double arg = static_cast<double>(schedule.grid_size) * td * td * std::numbers::pi *
                     std::numbers::pi / (3.0 * schedule.delta);
  if (arg <= 1.0) {
    if (arg < 1.0) {
      std::ostringstream msg;
      msg << "beta_" << t << " clamped to 0 (log argument " << arg << " < 1)";
      warn(msg.str());
    }
    return 0.0;
  }
  return 2.0 * std::log(arg);
}

std::size_t ucb_select(const Eigen::VectorXd& means, const Eigen::VectorXd& variances,
                       double beta_value) {
  if (!(beta_value >= 0.0)) throw std::invalid_argument("ucb_select: beta must be >= 0");
  if (means.size() == 0) throw std::invalid_argument("ucb_select: empty grid");
  if (variances.size() != means.size()) throw std::invalid_argument("ucb_select: size mismatch");
  const double root = std::sqrt(beta_value);
  std::size_t best = 0;
  double best_score = means(0) + root * std::sqrt(variances(0));
  for (Eigen::Index i = 1; i < means.size(); ++i) {
    const double score = means(i) + root * std::sqrt(variances(i));
    if (score > best_score) {
      best_score = score;
      best = static_cast<std::size_t>(i);
    }
  }
  return best;
}

std::size_t ucb_select(const GPPosterior& post, double beta_value) {
  return ucb_select(post.means(), post.variances(), beta_value);
}

std::size_t expected_improvement_select(const GPPosterior& post, double incumbent) {
  if (post.grid_size() == 0) throw std::invalid_argument("expected_improvement_select: empty grid");
  const auto& mu = post.means();
  const auto& var = post.variances();
  std::size_t best = 0;
  double best_score = -1.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double sd = std::sqrt(var(i));
    const double gain = mu(i) - incumbent;
    double ei = std::max(gain, 0.0);
    if (sd > 0.0) {
      const double z = gain / sd;
      const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
      const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
      ei = gain * cdf + sd * pdf;
    }
    if (ei > best_score) {
      best_score = ei;
      best = static_cast<std::size_t>(i);
    }
  }
  return best;
}

std::string_view to_string(InfoGainMethod method) {
  return method == InfoGainMethod::GreedyScaled ? "greedy_scaled" : "exact_brute_force";
}

GreedyInfoGain greedy_info_gain(const HyperparamGrid& grid, const KernelParams& params,
                                double noise_variance, std::size_t steps) {
  if (!(noise_variance > 0.0)) {
    throw std::invalid_argument(
        "info gain diverges for zero observation noise; use the noise-free release path");
  }
  if (steps < 1) throw std::invalid_argument("info gain: T must be >= 1");
  params.validate();

  const auto n = static_cast<Eigen::Index>(grid.size());
  const auto d = grid.dimension();
  // Incremental conditioning: var_i <- var_i - c_i^2 / (var_j + sigma^2) with
  // c the residual covariance column of the chosen point j.
  Eigen::VectorXd var = Eigen::VectorXd::Ones(n);
  Eigen::MatrixXd factors(n, static_cast<Eigen::Index>(steps));
  std::vector<bool> used(grid.size(), false);

  GreedyInfoGain out;
  for (std::size_t step = 0; step < steps; ++step) {
    const bool exhausted = step >= grid.size();
    Eigen::Index pick = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!exhausted && used[static_cast<std::size_t>(i)]) continue;
      if (pick < 0 || var(i) > var(pick)) pick = i;
    }
    const double pick_var = std::max(var(pick), 0.0);
    const double gain = 0.5 * std::log1p(pick_var / noise_variance);
    out.selected.push_back(static_cast<std::size_t>(pick));
    out.marginal_gains.push_back(gain);
    out.total += gain;
    used[static_cast<std::size_t>(pick)] = true;

    const auto col = static_cast<Eigen::Index>(step);
    const std::span<const double> pj(grid.points().col(pick).data(), d);
    const double denom = std::sqrt(pick_var + noise_variance);
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = k2_eval({grid.points().col(i).data(), d}, pj, params);
      if (col > 0) c -= factors.row(i).head(col).dot(factors.row(pick).head(col));
      factors(i, col) = c / denom;
      var(i) -= factors(i, col) * factors(i, col);
    }
  }
  return out;
}

namespace {

double half_log_det_gain(const HyperparamGrid& grid, const KernelParams& params,
                         double noise_variance, const std::vector<std::size_t>& subset) {
  const auto k = static_cast<Eigen::Index>(subset.size());
  Eigen::MatrixXd pts(grid.dimension(), k);
  for (Eigen::Index j = 0; j < k; ++j) pts.col(j) = grid.points().col(static_cast<Eigen::Index>(subset[j]));
  Eigen::MatrixXd m = gram_matrix(pts, params) / noise_variance;
  m.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.matrixLLT().diagonal().array().log().sum();
}

double exact_info_gain(const HyperparamGrid& grid, const KernelParams& params,
                       double noise_variance, std::size_t steps) {
  if (grid.size() > kExactInfoGainMaxGrid || steps > kExactInfoGainMaxSteps || steps > grid.size()) {
    throw std::invalid_argument(
        "exact info gain supports |grid| <= 12 and T <= min(6, |grid|)");
  }
  const std::size_t n = grid.size();
  std::vector<std::size_t> subset(steps);
  for (std::size_t i = 0; i < steps; ++i) subset[i] = i;
  double best = -1.0;
  while (true) {
    best = std::max(best, half_log_det_gain(grid, params, noise_variance, subset));
    // Next combination in lexicographic order.
    std::size_t i = steps;
    while (i > 0 && subset[i - 1] == n - steps + (i - 1)) --i;
    if (i == 0) break;
    ++subset[i - 1];
    for (std::size_t j = i; j < steps; ++j) subset[j] = subset[j - 1] + 1;
  }
  return best;
}

}  // namespace

InfoGainBound info_gain(const HyperparamGrid& grid, const KernelParams& params,
                        double noise_variance, std::size_t steps, InfoGainMethod method) {
  if (!(noise_variance > 0.0)) {
    throw std::invalid_argument(
        "info gain diverges for zero observation noise; use the noise-free release path");
  }
  if (steps < 1) throw std::invalid_argument("info gain: T must be >= 1");
  if (method == InfoGainMethod::ExactBruteForce) {
    return {exact_info_gain(grid, params, noise_variance, steps), method};
  }
  const auto greedy = greedy_info_gain(grid, params, noise_variance, steps);
  return {greedy.total / (1.0 - std::exp(-1.0)), method};
}

}  // namespace dpbo
