#include "dpbo/sobol.hpp"

#include <boost/random/sobol.hpp>

#include <stdexcept>
#include <string>

namespace dpbo {

std::size_t sobol_max_dimension() {
  return boost::random::default_sobol_table::max_dimension;
}

Eigen::MatrixXd sobol_points(std::size_t dimension, std::size_t count) {
  if (dimension < 1 || count < 1) {
    throw std::invalid_argument("sobol_points: dimension and count must be >= 1");
  }
  if (dimension > sobol_max_dimension()) {
    throw std::invalid_argument("sobol_points: dimension " + std::to_string(dimension) +
                                " exceeds the supported maximum of " +
                                std::to_string(sobol_max_dimension()));
  }
  // The boost engine starts at index 1, which is the skip-zero convention.
  boost::random::sobol engine(dimension);
  constexpr double kScale = 0x1.0p-64;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(dimension), static_cast<Eigen::Index>(count));
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      out(i, j) = static_cast<double>(engine()) * kScale;
    }
  }
  return out;
}

}  // namespace dpbo
