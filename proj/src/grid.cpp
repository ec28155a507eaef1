#include "dpbo/grid.hpp"

#include "dpbo/sobol.hpp"

#include <cmath>
#include <stdexcept>

namespace dpbo {
namespace {

void check_box(const std::vector<double>& lower, const std::vector<double>& upper) {
  if (lower.empty() || lower.size() != upper.size()) {
    throw std::invalid_argument("grid box bounds must be nonempty and of equal dimension");
  }
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(lower[i] <= upper[i])) throw std::invalid_argument("grid box has lower > upper");
  }
}

}  // namespace

HyperparamGrid::HyperparamGrid(Eigen::MatrixXd points) : points_(std::move(points)) {
  if (points_.rows() < 1 || points_.cols() < 1) {
    throw std::invalid_argument("hyper-parameter grid must be nonempty with d >= 1");
  }
  if (!points_.allFinite()) throw std::invalid_argument("hyper-parameter grid has non-finite values");
}

HyperparamGrid HyperparamGrid::from_points(const std::vector<std::vector<double>>& points) {
  if (points.empty() || points.front().empty()) {
    throw std::invalid_argument("hyper-parameter grid must be nonempty with d >= 1");
  }
  const auto d = points.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(points.size()));
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (points[j].size() != d) throw std::invalid_argument("grid points have mixed dimensions");
    for (std::size_t i = 0; i < d; ++i) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = points[j][i];
    }
  }
  return HyperparamGrid(std::move(m));
}

HyperparamGrid HyperparamGrid::sobol(std::size_t count, const std::vector<double>& lower,
                                     const std::vector<double>& upper) {
  check_box(lower, upper);
  Eigen::MatrixXd unit = sobol_points(lower.size(), count);
  for (Eigen::Index i = 0; i < unit.rows(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    unit.row(i) = (lower[k] + (upper[k] - lower[k]) * unit.row(i).array()).matrix();
  }
  return HyperparamGrid(std::move(unit));
}

HyperparamGrid HyperparamGrid::lattice(std::size_t per_dim, const std::vector<double>& lower,
                                       const std::vector<double>& upper) {
  check_box(lower, upper);
  if (per_dim < 1) throw std::invalid_argument("lattice needs at least one point per axis");
  const std::size_t d = lower.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) total *= per_dim;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(total));
  for (std::size_t j = 0; j < total; ++j) {
    std::size_t rem = j;
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t step = rem % per_dim;
      rem /= per_dim;
      const double frac = per_dim == 1 ? 0.5 : static_cast<double>(step) / static_cast<double>(per_dim - 1);
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = lower[i] + frac * (upper[i] - lower[i]);
    }
  }
  return HyperparamGrid(std::move(m));
}

std::span<const double> HyperparamGrid::point(std::size_t index) const {
  if (index >= size()) throw std::out_of_range("grid index out of range");
  return {points_.col(static_cast<Eigen::Index>(index)).data(), dimension()};
}

std::vector<double> HyperparamGrid::point_vector(std::size_t index) const {
  const auto p = point(index);
  return {p.begin(), p.end()};
}

}  // namespace dpbo
