#pragma once

#include "dpbo/grid.hpp"
#include "dpbo/kernels.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace dpbo {

/// Diagonal jitter used when the observation noise is exactly zero.
inline constexpr double kNoiseFreeJitter = 1e-10;

/// Observed (grid index, value) pairs plus the Gaussian observation noise.
struct ObservationLog {
  std::vector<std::size_t> indices;
  std::vector<double> values;
  double noise_variance = 0.0;

  std::size_t size() const noexcept { return indices.size(); }
  void add(std::size_t index, double value);
  /// Throws std::invalid_argument on any broken invariant.
  void validate(std::size_t grid_size) const;
};

struct Prediction {
  double mean = 0.0;
  double variance = 1.0;
};

/// Zero-mean GP posterior over every grid point, computed through a Cholesky
/// factor of (K_T + sigma^2 I). Immutable once fitted.
class GPPosterior {
 public:
  static GPPosterior fit(const HyperparamGrid& grid, const KernelParams& params,
                         const ObservationLog& obs);

  Prediction predict(std::size_t grid_index) const;

  const Eigen::VectorXd& means() const noexcept { return means_; }
  const Eigen::VectorXd& variances() const noexcept { return variances_; }
  std::size_t grid_size() const noexcept { return static_cast<std::size_t>(means_.size()); }

  /// Lower factor L with L L^T = K_T + (sigma^2 + jitter) I.
  const Eigen::MatrixXd& cholesky_factor() const noexcept { return chol_; }
  const Eigen::VectorXd& alpha() const noexcept { return alpha_; }
  const std::vector<std::size_t>& train_indices() const noexcept { return train_indices_; }
  /// Row i holds k(lambda_i, lambda_T) for grid point i.
  const Eigen::MatrixXd& grid_cross() const noexcept { return grid_cross_; }
  double diagonal_jitter() const noexcept { return jitter_; }

 private:
  GPPosterior() = default;

  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
  std::vector<std::size_t> train_indices_;
  Eigen::MatrixXd grid_cross_;
  Eigen::VectorXd means_;
  Eigen::VectorXd variances_;
  double jitter_ = 0.0;
};

/// log N(values; 0, cov) through a Cholesky factor. Falls back to a small
/// diagonal jitter (with a warning) when the plain factorization fails.
double log_marginal_likelihood(const Eigen::MatrixXd& cov, const Eigen::VectorXd& values);

}  // namespace dpbo
