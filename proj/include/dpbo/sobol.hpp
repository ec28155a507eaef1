#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace dpbo {

/// First `count` points of the d-dimensional Sobol sequence (Joe-Kuo
/// direction numbers), skipping the all-zero point at index 0. Returned as
/// the columns of a d x count matrix in [0, 1)^d.
Eigen::MatrixXd sobol_points(std::size_t dimension, std::size_t count);

/// Largest dimension the direction-number table supports.
std::size_t sobol_max_dimension();

}  // namespace dpbo
