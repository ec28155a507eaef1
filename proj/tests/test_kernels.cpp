#include "dpbo/grid.hpp"
#include "dpbo/kernels.hpp"
#include "dpbo/sobol.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <random>

namespace dpbo {
namespace {

using testing::random_grid;

const KernelParams kSe1{KernelFamily::SquaredExponential, 1.0};
const KernelParams kMatern1{KernelFamily::Matern52, 1.0};

TEST(Kernel, SquaredExponentialAtZeroDistanceIsOne) {
  const std::vector<double> a{0.3, -1.2};
  for (double l : {0.1, 1.0, 7.5}) {
    EXPECT_DOUBLE_EQ(k2_eval(a, a, {KernelFamily::SquaredExponential, l}), 1.0);
  }
}

TEST(Kernel, SquaredExponentialAtSqrtTwo) {
  const std::vector<double> a{0.0, 0.0};
  const std::vector<double> b{1.0, 1.0};
  EXPECT_NEAR(k2_eval(a, b, kSe1), 0.367879441171442321595523770161, 1e-15);
}

TEST(Kernel, Matern52AtUnitDistance) {
  const std::vector<double> a{0.0};
  const std::vector<double> b{1.0};
  EXPECT_NEAR(k2_eval(a, b, kMatern1), 0.523994108831820310592713250761, 1e-15);
}

TEST(Kernel, SymmetricAndNormalized) {
  Rng rng(11);
  for (auto family : {KernelFamily::SquaredExponential, KernelFamily::Matern52}) {
    const KernelParams p{family, 0.4};
    for (int k = 0; k < 50; ++k) {
      std::vector<double> a{uniform_open01(rng), uniform_open01(rng), uniform_open01(rng)};
      std::vector<double> b{uniform_open01(rng), uniform_open01(rng), uniform_open01(rng)};
      EXPECT_EQ(k2_eval(a, b, p), k2_eval(b, a, p));
      EXPECT_EQ(k2_eval(a, a, p), 1.0);
    }
  }
}

TEST(Kernel, SquaredExponentialDecaysWithDistance) {
  const std::vector<double> origin{0.0};
  double previous = 1.0;
  for (int i = 1; i <= 40; ++i) {
    const std::vector<double> b{0.1 * i};
    const double k = k2_eval(origin, b, {KernelFamily::SquaredExponential, 0.8});
    EXPECT_LT(k, previous);
    previous = k;
  }
}

TEST(Kernel, RejectsDimensionMismatchAndNonFinite) {
  const std::vector<double> a{0.0, 1.0};
  const std::vector<double> b{0.0};
  EXPECT_THROW(k2_eval(a, b, kSe1), std::invalid_argument);
  const std::vector<double> bad{0.0, std::numeric_limits<double>::quiet_NaN()};
  EXPECT_THROW(k2_eval(a, bad, kSe1), std::invalid_argument);
  const std::vector<double> inf{std::numeric_limits<double>::infinity(), 0.0};
  EXPECT_THROW(k2_eval(inf, a, kMatern1), std::invalid_argument);
}

TEST(Kernel, RejectsNonPositiveLengthscale) {
  EXPECT_THROW((KernelParams{KernelFamily::SquaredExponential, 0.0}.validate()), std::invalid_argument);
  EXPECT_THROW((KernelParams{KernelFamily::Matern52, -1.0}.validate()), std::invalid_argument);
}

TEST(Kernel, FamilyNames) {
  EXPECT_EQ(kernel_family_from_string("squared_exponential"), KernelFamily::SquaredExponential);
  EXPECT_EQ(kernel_family_from_string("matern52"), KernelFamily::Matern52);
  EXPECT_EQ(kernel_family_from_string(to_string(KernelFamily::Matern52)), KernelFamily::Matern52);
  EXPECT_THROW(kernel_family_from_string("rbf2"), std::invalid_argument);
}

TEST(GramMatrix, SinglePoint) {
  Eigen::MatrixXd pts(2, 1);
  pts << 0.2, 0.7;
  const auto k = gram_matrix(pts, kSe1);
  ASSERT_EQ(k.rows(), 1);
  EXPECT_DOUBLE_EQ(k(0, 0), 1.0);
}

TEST(GramMatrix, IdenticalPointsAreAllOnes) {
  Eigen::MatrixXd pts(1, 2);
  pts << 0.5, 0.5;
  EXPECT_TRUE(gram_matrix(pts, kSe1).isApprox(Eigen::MatrixXd::Ones(2, 2)));
}

TEST(GramMatrix, MatchesElementwiseKernel) {
  Rng rng(3);
  const auto grid = random_grid(3, 2, rng);
  const auto k = gram_matrix(grid.points(), kMatern1);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_EQ(k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                k2_eval(grid.point(i), grid.point(j), kMatern1));
    }
  }
}

TEST(GramMatrix, PositiveSemidefinite) {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto grid = random_grid(1 + rng() % 20, 1 + rng() % 3, rng);
    for (const auto& p : {kSe1, KernelParams{KernelFamily::Matern52, 0.3}}) {
      Eigen::MatrixXd k = gram_matrix(grid.points(), p);
      EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(k).eigenvalues().minCoeff(), -1e-8);
      k.diagonal().array() += 1e-8;
      EXPECT_EQ(Eigen::LLT<Eigen::MatrixXd>(k).info(), Eigen::Success);
    }
  }
}

TEST(GramMatrix, CrossCovarianceRejectsDimensionMismatch) {
  EXPECT_THROW(cross_covariance(Eigen::MatrixXd::Zero(2, 3), Eigen::MatrixXd::Zero(3, 1), kSe1),
               std::invalid_argument);
}

TEST(MultiTaskKernel, ProductForm) {
  EXPECT_DOUBLE_EQ(multi_task_kernel(DatasetSimilarity(1.0), 0.5), 0.5);
  EXPECT_DOUBLE_EQ(multi_task_kernel(DatasetSimilarity(0.0), 0.77), 0.0);
  EXPECT_NEAR(multi_task_kernel(DatasetSimilarity(0.95), 0.4), 0.38, 1e-15);
}

TEST(MultiTaskKernel, SimilarityRange) {
  EXPECT_THROW(DatasetSimilarity(-0.1), std::invalid_argument);
  EXPECT_THROW(DatasetSimilarity(1.5), std::invalid_argument);
}

TEST(Jaccard, Overlap) {
  EXPECT_DOUBLE_EQ(jaccard({1, 2, 3}, {2, 3, 4}), 0.5);
  EXPECT_DOUBLE_EQ(jaccard({1, 2}, {1, 2}), 1.0);
  EXPECT_DOUBLE_EQ(jaccard({1}, {2}), 0.0);
}

TEST(Sobol, FirstPointIsCenter) {
  for (std::size_t d : {1u, 2u, 5u, 20u}) {
    const auto pts = sobol_points(d, 1);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) EXPECT_DOUBLE_EQ(pts(i, 0), 0.5);
  }
}

TEST(Sobol, DyadicBlocksAreBalanced) {
  // The block of 2^k points starting at the skipped origin is balanced, so the
  // first 2^k - 1 returned points hold 2^(k-1) - 1 values below one half.
  const auto pts = sobol_points(4, 255);
  for (int k = 1; k <= 8; ++k) {
    const Eigen::Index n = (Eigen::Index{1} << k) - 1;
    for (Eigen::Index dim = 0; dim < 4; ++dim) {
      const auto below = (pts.row(dim).head(n).array() < 0.5).count();
      EXPECT_EQ(below, (n + 1) / 2 - 1) << "block " << n + 1 << " dimension " << dim;
    }
  }
}

/// Largest |empirical - volume| over anchored boxes at every point and corner combination.
double star_discrepancy(const Eigen::MatrixXd& pts) {
  const Eigen::Index n = pts.cols();
  std::vector<double> xs{1.0};
  std::vector<double> ys{1.0};
  for (Eigen::Index i = 0; i < n; ++i) {
    xs.push_back(pts(0, i));
    ys.push_back(pts(1, i));
  }
  double worst = 0.0;
  for (double x : xs) {
    for (double y : ys) {
      Eigen::Index open = 0;
      Eigen::Index closed = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (pts(0, i) < x && pts(1, i) < y) ++open;
        if (pts(0, i) <= x && pts(1, i) <= y) ++closed;
      }
      const double vol = x * y;
      worst = std::max({worst, vol - static_cast<double>(open) / static_cast<double>(n),
                        static_cast<double>(closed) / static_cast<double>(n) - vol});
    }
  }
  return worst;
}

TEST(Sobol, LowerDiscrepancyThanRandom) {
  const double sobol = star_discrepancy(sobol_points(2, 64));
  double random = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    random += star_discrepancy(random_grid(64, 2, rng).points());
  }
  EXPECT_LT(sobol, random / 20.0);
}

TEST(Sobol, RejectsUnsupportedDimension) {
  EXPECT_THROW(sobol_points(sobol_max_dimension() + 1, 4), std::invalid_argument);
  EXPECT_THROW(sobol_points(0, 4), std::invalid_argument);
}

TEST(Grid, SobolBoxMapping) {
  const auto grid = HyperparamGrid::sobol(8, {-1.0, 10.0}, {1.0, 20.0});
  EXPECT_EQ(grid.size(), 8u);
  EXPECT_EQ(grid.dimension(), 2u);
  EXPECT_DOUBLE_EQ(grid.point(0)[0], 0.0);
  EXPECT_DOUBLE_EQ(grid.point(0)[1], 15.0);
}

TEST(Grid, LatticeCoversCorners) {
  const auto grid = HyperparamGrid::lattice(3, {0.0, 0.0}, {1.0, 2.0});
  EXPECT_EQ(grid.size(), 9u);
  EXPECT_DOUBLE_EQ(grid.points().row(1).maxCoeff(), 2.0);
  EXPECT_DOUBLE_EQ(grid.points().row(0).minCoeff(), 0.0);
}

TEST(Grid, RejectsRaggedPoints) {
  EXPECT_THROW(HyperparamGrid::from_points({{0.0, 1.0}, {0.5}}), std::invalid_argument);
  EXPECT_THROW(HyperparamGrid::from_points({}), std::invalid_argument);
}

}  // namespace
}  // namespace dpbo
