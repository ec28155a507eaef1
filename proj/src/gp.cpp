#include "dpbo/gp.hpp"

#include "dpbo/common.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dpbo {

void ObservationLog::add(std::size_t index, double value) {
  indices.push_back(index);
  values.push_back(value);
}

void ObservationLog::validate(std::size_t grid_size) const {
  if (indices.size() != values.size()) {
    throw std::invalid_argument("observation log: indices and values differ in length");
  }
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
    throw std::invalid_argument("observation log: noise variance must be finite and >= 0");
  }
  for (std::size_t t = 0; t < indices.size(); ++t) {
    if (indices[t] >= grid_size) throw std::out_of_range("observation log: grid index out of range");
    if (!std::isfinite(values[t])) throw std::invalid_argument("observation log: non-finite value");
  }
  if (noise_variance == 0.0) {
    const std::set<std::size_t> unique(indices.begin(), indices.end());
    if (unique.size() != indices.size()) {
      throw std::invalid_argument(
          "observation log: duplicate grid index with zero observation noise");
    }
  }
}

GPPosterior GPPosterior::fit(const HyperparamGrid& grid, const KernelParams& params,
                             const ObservationLog& obs) {
  params.validate();
  obs.validate(grid.size());

  GPPosterior post;
  const auto n = static_cast<Eigen::Index>(grid.size());
  const auto t = static_cast<Eigen::Index>(obs.size());
  post.train_indices_ = obs.indices;

  if (t == 0) {
    post.grid_cross_.resize(n, 0);
    post.means_ = Eigen::VectorXd::Zero(n);
    post.variances_ = Eigen::VectorXd::Ones(n);
    return post;
  }

  Eigen::MatrixXd train_points(grid.dimension(), t);
  for (Eigen::Index j = 0; j < t; ++j) {
    train_points.col(j) = grid.points().col(static_cast<Eigen::Index>(obs.indices[j]));
  }
  post.grid_cross_ = cross_covariance(grid.points(), train_points, params);

  Eigen::MatrixXd system(t, t);
  for (Eigen::Index j = 0; j < t; ++j) {
    system.row(j) = post.grid_cross_.row(static_cast<Eigen::Index>(obs.indices[j]));
  }
  post.jitter_ = obs.noise_variance == 0.0 ? kNoiseFreeJitter : 0.0;
  system.diagonal().array() += obs.noise_variance + post.jitter_;

  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) {
    throw SingularModelError("GP fit: Cholesky factorization of K_T + sigma^2 I failed");
  }
  post.chol_ = llt.matrixL();

  const Eigen::Map<const Eigen::VectorXd> v(obs.values.data(), t);
  post.alpha_ = llt.solve(v);
  post.means_ = post.grid_cross_ * post.alpha_;

  const Eigen::MatrixXd whitened =
      llt.matrixL().solve(post.grid_cross_.transpose());  // T x N
  post.variances_ = (1.0 - whitened.colwise().squaredNorm().array()).matrix();
  for (Eigen::Index i = 0; i < n; ++i) {
    double& var = post.variances_(i);
    if (var < 0.0) {
      if (var < -1e-8) {
        std::ostringstream msg;
        msg << "GP posterior variance " << var << " at grid index " << i << " clamped to 0";
        warn(msg.str());
      }
      var = 0.0;
    }
  }
  return post;
}

Prediction GPPosterior::predict(std::size_t grid_index) const {
  if (grid_index >= grid_size()) throw std::out_of_range("GP predict: grid index out of range");
  const auto i = static_cast<Eigen::Index>(grid_index);
  return {means_(i), variances_(i)};
}

double log_marginal_likelihood(const Eigen::MatrixXd& cov, const Eigen::VectorXd& values) {
  if (cov.rows() != cov.cols() || cov.rows() != values.size() || values.size() == 0) {
    throw std::invalid_argument("log_marginal_likelihood: dimension mismatch");
  }
  const double scale = std::max(1.0, cov.diagonal().cwiseAbs().mean());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw std::invalid_argument("log_marginal_likelihood: covariance is not symmetric");
  }
  for (const double rel_jitter : {0.0, 1e-10, 1e-8, 1e-6}) {
    Eigen::MatrixXd work = cov;
    work.diagonal().array() += rel_jitter * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() != Eigen::Success) continue;
    if (rel_jitter > 0.0) {
      std::ostringstream msg;
      msg << "log_marginal_likelihood: added diagonal jitter " << rel_jitter * scale;
      warn(msg.str());
    }
    const Eigen::VectorXd white = llt.matrixL().solve(values);
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const auto n = static_cast<double>(values.size());
    return -0.5 * white.squaredNorm() - 0.5 * log_det -
           0.5 * n * std::log(2.0 * std::numbers::pi);
  }
  throw SingularModelError("log_marginal_likelihood: covariance is not positive definite");
}

}  // namespace dpbo
