#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace dpbo {

/// Finite candidate set of hyper-parameters. Points are stored column-wise
/// (d x |grid|) so each point is a contiguous span.
class HyperparamGrid {
 public:
  explicit HyperparamGrid(Eigen::MatrixXd points);

  static HyperparamGrid from_points(const std::vector<std::vector<double>>& points);
  /// `count` Sobol points mapped into the box [lower, upper].
  static HyperparamGrid sobol(std::size_t count, const std::vector<double>& lower,
                              const std::vector<double>& upper);
  /// Regular lattice with `per_dim` points per axis over [lower, upper].
  static HyperparamGrid lattice(std::size_t per_dim, const std::vector<double>& lower,
                                const std::vector<double>& upper);

  std::size_t size() const noexcept { return static_cast<std::size_t>(points_.cols()); }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(points_.rows()); }

  std::span<const double> point(std::size_t index) const;
  std::vector<double> point_vector(std::size_t index) const;
  const Eigen::MatrixXd& points() const noexcept { return points_; }

 private:
  Eigen::MatrixXd points_;
};

}  // namespace dpbo
