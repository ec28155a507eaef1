#include "dpbo/convex_train.hpp"

#include "dpbo/common.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace dpbo {
namespace {

LabeledDataset random_dataset(std::size_t n, std::size_t d, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  Eigen::VectorXd w_true(static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < w_true.size(); ++k) w_true(k) = normal(rng);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) x(i, k) = 0.6 * normal(rng);
    y(i) = x.row(i).dot(w_true) + 0.3 * normal(rng) >= 0.0 ? 1.0 : -1.0;
  }
  return {x, y};
}

TEST(Dataset, ProjectsRowsOntoUnitBall) {
  Eigen::MatrixXd x(2, 2);
  x << 3.0, 4.0, 0.3, 0.4;
  const LabeledDataset data(x, Eigen::Vector2d(1.0, -1.0));
  EXPECT_NEAR(data.features().row(0).norm(), 1.0, 1e-15);
  EXPECT_NEAR(data.features()(1, 0), 0.3, 1e-15);
  EXPECT_NEAR(data.max_feature_norm(), 1.0, 1e-15);
}

TEST(Dataset, RejectsBadLabelsAndShapes) {
  EXPECT_THROW(LabeledDataset(Eigen::MatrixXd::Zero(2, 1), Eigen::Vector2d(1.0, 0.0)),
               std::invalid_argument);
  EXPECT_THROW(LabeledDataset(Eigen::MatrixXd::Zero(2, 1), Eigen::VectorXd::Ones(3)),
               std::invalid_argument);
}

TEST(TrainErm, LargeLambdaShrinksWeights) {
  Rng rng(1);
  const auto data = random_dataset(30, 3, rng);
  const auto model = train_erm(data, 1e6, TrainingLoss::Logistic);
  EXPECT_LE(model.w.norm(), 1e-6);
}

TEST(TrainErm, SymmetricDataGivesZeroWeights) {
  Eigen::MatrixXd x(4, 2);
  x << 0.3, 0.5, -0.3, -0.5, 0.3, 0.5, -0.3, -0.5;
  Eigen::VectorXd y(4);
  y << 1.0, -1.0, -1.0, 1.0;
  const LabeledDataset data(x, y);
  for (auto loss : {TrainingLoss::Logistic, TrainingLoss::HuberHinge}) {
    EXPECT_LE(train_erm(data, 0.1, loss).w.norm(), 1e-9);
  }
}

TEST(TrainErm, MatchesGridSearch) {
  Eigen::MatrixXd x(5, 2);
  x << 0.5, 0.1, -0.2, 0.7, 0.9, -0.3, -0.6, -0.4, 0.1, 0.2;
  Eigen::VectorXd y(5);
  y << 1.0, -1.0, 1.0, -1.0, 1.0;
  const LabeledDataset data(x, y);
  const auto model = train_erm(data, 1.0, TrainingLoss::Logistic);
  const double found = erm_objective(data, model.w, 1.0, TrainingLoss::Logistic);
  // Independent evaluation of the objective over a 0.005-spaced grid on [-2, 2]^2.
  double best = 1e300;
  for (int i = 0; i <= 800; ++i) {
    for (int j = 0; j <= 800; ++j) {
      const double w0 = -2.0 + 0.005 * i;
      const double w1 = -2.0 + 0.005 * j;
      double risk = 0.0;
      for (Eigen::Index r = 0; r < 5; ++r) {
        const double z = y(r) * (w0 * x(r, 0) + w1 * x(r, 1));
        risk += std::log1p(std::exp(-z));
      }
      best = std::min(best, 0.5 * (w0 * w0 + w1 * w1) + risk / 5.0);
    }
  }
  EXPECT_NEAR(found, best, 1e-3);
  EXPECT_LE(found, best + 1e-12);
}

TEST(TrainErm, WeightNormAtMostInverseLambda) {
  Rng rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const auto data = random_dataset(40, 3, rng);
    for (double lambda : {0.01, 0.1, 1.0}) {
      for (auto loss : {TrainingLoss::Logistic, TrainingLoss::HuberHinge}) {
        EXPECT_LE(train_erm(data, lambda, loss).w.norm(), 1.0 / lambda + 1e-9);
      }
    }
  }
}

TEST(TrainErm, GradientVanishesAtOptimum) {
  Rng rng(3);
  const auto data = random_dataset(50, 3, rng);
  for (auto loss : {TrainingLoss::Logistic, TrainingLoss::HuberHinge}) {
    const auto model = train_erm(data, 0.05, loss);
    EXPECT_LE(erm_gradient(data, model.w, 0.05, loss).norm(), 1e-8);
  }
}

TEST(TrainErm, WeightDeviationBound) {
  Rng rng(4);
  for (int rep = 0; rep < 30; ++rep) {
    const auto data = random_dataset(50, 3, rng);
    const double lambda = 0.01 + uniform_open01(rng);
    const double lambda_prime = lambda + uniform_open01(rng);
    for (auto loss : {TrainingLoss::Logistic, TrainingLoss::HuberHinge}) {
      const auto a = train_erm(data, lambda, loss);
      const auto b = train_erm(data, lambda_prime, loss);
      EXPECT_LE((a.w - b.w).norm(), (lambda_prime - lambda) / (lambda * lambda_prime) + 1e-9);
    }
  }
}

TEST(TrainErm, HingeSubgradientNearHuberSolution) {
  Rng rng(5);
  const auto data = random_dataset(40, 2, rng);
  const auto hinge = train_erm(data, 0.5, TrainingLoss::Hinge);
  const auto huber = train_erm(data, 0.5, TrainingLoss::HuberHinge);
  EXPECT_LE(hinge.w.norm(), 1.0 / 0.5 + 1e-9);
  EXPECT_NEAR(erm_objective(data, hinge.w, 0.5, TrainingLoss::Hinge),
              erm_objective(data, huber.w, 0.5, TrainingLoss::Hinge), 1e-2);
}

TEST(TrainErm, RejectsNonPositiveLambda) {
  Rng rng(6);
  const auto data = random_dataset(10, 2, rng);
  EXPECT_THROW(train_erm(data, 0.0, TrainingLoss::Logistic), std::invalid_argument);
  EXPECT_THROW(train_erm(data, -1.0, TrainingLoss::Logistic), std::invalid_argument);
}

TEST(TrainErm, IterationCapReportsGradientNorm) {
  Rng rng(7);
  const auto data = random_dataset(30, 3, rng);
  TrainOptions options;
  options.max_newton_iterations = 1;
  options.gradient_tolerance = 1e-300;
  try {
    train_erm(data, 1e-3, TrainingLoss::Logistic, options);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.final_gradient_norm(), 0.0);
  }
}

TEST(Validation, RampAtZeroWeights) {
  Rng rng(8);
  const auto val = random_dataset(12, 3, rng);
  EXPECT_DOUBLE_EQ(validation_score(Eigen::VectorXd::Zero(3), val, ValidationLoss::Ramp), -1.0);
}

TEST(Validation, SeparatedWithMarginScoresZero) {
  Eigen::MatrixXd x(3, 1);
  x << 1.0, -1.0, 0.5;
  const LabeledDataset val(x, Eigen::Vector3d(1.0, -1.0, 1.0));
  Eigen::VectorXd w(1);
  w << 2.0;
  EXPECT_DOUBLE_EQ(validation_score(w, val, ValidationLoss::Ramp), 0.0);
}

TEST(Validation, MatchesPerPointLoop) {
  Rng rng(9);
  const auto val = random_dataset(10, 3, rng);
  std::normal_distribution<double> normal;
  for (auto loss : {ValidationLoss::Ramp, ValidationLoss::NormalizedSigmoid}) {
    Eigen::VectorXd w(3);
    for (Eigen::Index k = 0; k < 3; ++k) w(k) = normal(rng);
    double total = 0.0;
    for (Eigen::Index i = 0; i < 10; ++i) {
      const double z = val.labels()(i) * val.features().row(i).dot(w);
      total += loss == ValidationLoss::Ramp ? std::clamp(1.0 - z, 0.0, 1.0) : 1.0 / (1.0 + std::exp(z));
    }
    EXPECT_NEAR(validation_score(w, val, loss), -total / 10.0, 1e-14);
  }
}

TEST(Validation, LipschitzInWeights) {
  Rng rng(10);
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 200; ++rep) {
    const auto val = random_dataset(15, 3, rng);
    Eigen::VectorXd a(3);
    Eigen::VectorXd b(3);
    for (Eigen::Index k = 0; k < 3; ++k) {
      a(k) = normal(rng);
      b(k) = normal(rng);
    }
    for (auto loss : {ValidationLoss::Ramp, ValidationLoss::NormalizedSigmoid}) {
      const double lip = validation_lipschitz(loss, val);
      EXPECT_LE(std::abs(validation_score(a, val, loss) - validation_score(b, val, loss)),
                lip * (a - b).norm() + 1e-12);
    }
  }
}

TEST(Validation, EmptyValidationSetThrows) {
  const LabeledDataset empty(Eigen::MatrixXd::Zero(0, 2), Eigen::VectorXd::Zero(0));
  EXPECT_THROW(validation_score(Eigen::VectorXd::Zero(2), empty, ValidationLoss::Ramp),
               std::invalid_argument);
}

TEST(StabilityBound, EqualLambdas) {
  EXPECT_DOUBLE_EQ(stability_bound(0.3, 0.3, 1.0, 1.0, 50, 0.1), std::min(1.0 / 50, 1.0 / (50 * 0.1)));
}

TEST(StabilityBound, ReferenceValue) {
  EXPECT_NEAR(stability_bound(0.5, 1.0, 1.0, 1.0, 100, 0.5), 1.01, 1e-15);
  EXPECT_NEAR(stability_bound(1.0, 0.5, 1.0, 1.0, 100, 0.5), 1.01, 1e-15);
}

TEST(StabilityBound, LargeValidationSetLimit) {
  const double range = (2.0 - 0.4) / (2.0 * 0.4);
  EXPECT_NEAR(stability_bound(0.4, 2.0, 1.0, 1.0, 100000000, 0.4), range, 1e-7);
}

TEST(StabilityBound, RejectsNonPositiveLambda) {
  EXPECT_THROW(stability_bound(0.0, 1.0, 1.0, 1.0, 10, 0.1), std::invalid_argument);
  EXPECT_THROW(stability_bound(0.5, 1.0, 1.0, 1.0, 10, 0.0), std::invalid_argument);
}

TEST(Losses, NamesRoundTrip) {
  for (auto l : {TrainingLoss::Logistic, TrainingLoss::HuberHinge, TrainingLoss::Hinge}) {
    EXPECT_EQ(training_loss_from_string(to_string(l)), l);
  }
  for (auto l : {ValidationLoss::Ramp, ValidationLoss::NormalizedSigmoid}) {
    EXPECT_EQ(validation_loss_from_string(to_string(l)), l);
  }
  EXPECT_THROW(training_loss_from_string("squared"), std::invalid_argument);
}

}  // namespace
}  // namespace dpbo
