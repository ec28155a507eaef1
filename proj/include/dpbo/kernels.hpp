#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dpbo {

enum class KernelFamily { SquaredExponential, Matern52 };

std::string_view to_string(KernelFamily family);
KernelFamily kernel_family_from_string(std::string_view name);

/// Hyper-parameter covariance k2. Both families are normalized: k2(x, x) = 1.
struct KernelParams {
  KernelFamily family = KernelFamily::SquaredExponential;
  double lengthscale = 1.0;

  void validate() const;
};

/// Task similarity k1 between a validation set and its neighbour, in [0, 1].
/// Supplied as data; 1 means the two sets are treated as identical.
class DatasetSimilarity {
 public:
  explicit DatasetSimilarity(double k1);
  double value() const noexcept { return k1_; }

 private:
  double k1_;
};

double k2_eval(std::span<const double> a, std::span<const double> b, const KernelParams& params);

/// Gram matrix over points stored as the columns of `points` (d x n).
Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& points, const KernelParams& params);

/// k(a_i, b_j) for the columns of `a` and `b`.
Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                 const KernelParams& params);

/// Product combination k1 * k2 of the multi-task kernel.
double multi_task_kernel(const DatasetSimilarity& k1, double k2_value);

/// |A n B| / |A u B| over record identifiers. A convenience estimate only; k1
/// is normally passed in explicitly.
double jaccard(const std::set<std::size_t>& a, const std::set<std::size_t>& b);

}  // namespace dpbo
