#include "dpbo/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpbo {

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::SquaredExponential:
      return "squared_exponential";
    case KernelFamily::Matern52:
      return "matern52";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "squared_exponential" || name == "se") return KernelFamily::SquaredExponential;
  if (name == "matern52" || name == "matern") return KernelFamily::Matern52;
  throw std::invalid_argument("unknown kernel family '" + std::string(name) + "'");
}

void KernelParams::validate() const {
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
    throw std::invalid_argument("kernel lengthscale must be positive and finite");
  }
}

DatasetSimilarity::DatasetSimilarity(double k1) : k1_(k1) {
  if (!(k1 >= 0.0 && k1 <= 1.0)) {
    throw std::invalid_argument("dataset similarity k1 must lie in [0, 1]");
  }
}

namespace {

double kernel_from_distance(double r, const KernelParams& params) {
  const double l = params.lengthscale;
  switch (params.family) {
    case KernelFamily::SquaredExponential:
      return std::exp(-r * r / (2.0 * l * l));
    case KernelFamily::Matern52: {
      const double s = std::sqrt(5.0) * r / l;
      return (1.0 + s + 5.0 * r * r / (3.0 * l * l)) * std::exp(-s);
    }
  }
  throw std::logic_error("unhandled kernel family");
}

}  // namespace

double k2_eval(std::span<const double> a, std::span<const double> b, const KernelParams& params) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("k2_eval: points must have equal, nonzero dimension");
  }
  params.validate();
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
      throw std::invalid_argument("k2_eval: non-finite coordinate");
    }
    const double diff = a[i] - b[i];
    sq += diff * diff;
  }
  return kernel_from_distance(std::sqrt(sq), params);
}

Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                 const KernelParams& params) {
  if (a.rows() != b.rows()) {
    throw std::invalid_argument("cross_covariance: dimension mismatch");
  }
  Eigen::MatrixXd out(a.cols(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    const std::span<const double> bj(b.col(j).data(), static_cast<std::size_t>(b.rows()));
    for (Eigen::Index i = 0; i < a.cols(); ++i) {
      out(i, j) = k2_eval({a.col(i).data(), static_cast<std::size_t>(a.rows())}, bj, params);
    }
  }
  return out;
}

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& points, const KernelParams& params) {
  if (points.cols() == 0) throw std::invalid_argument("gram_matrix: no points");
  const Eigen::Index n = points.cols();
  const auto d = static_cast<std::size_t>(points.rows());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = k2_eval({points.col(i).data(), d}, {points.col(j).data(), d}, params);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

double multi_task_kernel(const DatasetSimilarity& k1, double k2_value) {
  if (!(k2_value >= -1.0 && k2_value <= 1.0)) {
    throw std::invalid_argument("multi_task_kernel: k2 value outside [-1, 1]");
  }
  return k1.value() * k2_value;
}

double jaccard(const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t common = 0;
  for (auto x : a) common += b.count(x);
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

}  // namespace dpbo
