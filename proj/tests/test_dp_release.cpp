#include "dpbo/dp_release.hpp"

#include "dpbo/mechanisms.hpp"
#include "dpbo/verification.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>
#include <random>

namespace dpbo {
namespace {

using testing::random_grid;

/// Fixed draw from the GP prior over the grid.
std::vector<double> gp_draw(const HyperparamGrid& grid, const KernelParams& p, std::uint64_t seed) {
  Eigen::MatrixXd k = gram_matrix(grid.points(), p);
  k.diagonal().array() += 1e-9;
  const Eigen::LLT<Eigen::MatrixXd> llt(k);
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(k.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  const Eigen::VectorXd f = llt.matrixL() * z;
  return {f.data(), f.data() + f.size()};
}

Objective table_objective(std::vector<double> f) {
  return [f = std::move(f)](std::size_t idx, std::span<const double>) { return f[idx]; };
}

NoisyRunConfig noisy_config(std::size_t n, std::size_t T, std::uint64_t seed = 0) {
  NoisyRunConfig cfg{HyperparamGrid::sobol(n, {0.0, 0.0}, {1.0, 1.0}),
                     {KernelFamily::SquaredExponential, 0.2}};
  cfg.T = T;
  cfg.budget = {1.0, 0.1};
  cfg.noise_variance = 1.0;
  cfg.k1 = 0.95;
  cfg.seed = seed;
  return cfg;
}

TEST(ComposeBudget, SumRule) {
  const auto one = compose_budget({{0.7, 0.01}});
  EXPECT_DOUBLE_EQ(one.epsilon, 0.7);
  EXPECT_DOUBLE_EQ(one.delta, 0.01);
  const auto two = compose_budget({{1.0, 0.1}, {1.0, 0.1}});
  EXPECT_DOUBLE_EQ(two.epsilon, 2.0);
  EXPECT_DOUBLE_EQ(two.delta, 0.2);
  const auto three = compose_budget({{1.0, 0.1}, {0.5, 0.05}, {0.5, 0.05}});
  EXPECT_DOUBLE_EQ(three.epsilon, 2.0);
  EXPECT_NEAR(three.delta, 0.2, 1e-16);
}

TEST(SensitivityBundle, IdenticalDatasetsHaveZeroC) {
  auto cfg = noisy_config(100, 5);
  cfg.k1 = 1.0;
  EXPECT_EQ(compute_bundle(cfg, {1.0, InfoGainMethod::GreedyScaled}).c, 0.0);
}

TEST(SensitivityBundle, ReferenceConstants) {
  auto cfg = noisy_config(100, 5);
  const auto b = compute_bundle(cfg, {2.0, InfoGainMethod::GreedyScaled});
  EXPECT_NEAR(b.c, 1.26541436436056365350371420787, 1e-14);
  EXPECT_NEAR(b.C1, 11.541560327111707258879397448, 1e-13);
  EXPECT_NEAR(b.q, 3.68846709713515290585696126903, 1e-14);
}

TEST(SensitivityBundle, NoiseFreeIsRejected) {
  auto cfg = noisy_config(10, 5);
  cfg.noise_variance = 0.0;
  EXPECT_THROW(compute_bundle(cfg, {1.0, InfoGainMethod::GreedyScaled}), std::invalid_argument);
  EXPECT_THROW(plan_noisy(cfg), std::invalid_argument);
}

TEST(SensitivityBundle, LargerEpsilonShrinksScales) {
  auto lo = noisy_config(30, 10);
  auto hi = lo;
  hi.budget.epsilon = 2.0;
  const InfoGainBound g{3.0, InfoGainMethod::GreedyScaled};
  EXPECT_LT(compute_bundle(hi, g).laplace_scale_v, compute_bundle(lo, g).laplace_scale_v);
  auto elo = ExactRunConfig{lo.grid, lo.kernel};
  auto ehi = elo;
  ehi.budget.epsilon = 2.0;
  EXPECT_LT(compute_exact_bundle(ehi).laplace_scale_f, compute_exact_bundle(elo).laplace_scale_f);
}

TEST(RunNoisy, SinglePointGrid) {
  NoisyRunConfig cfg{HyperparamGrid::from_points({{0.4}}), {KernelFamily::SquaredExponential, 1.0}};
  cfg.T = 1;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cfg.seed = seed;
    const auto rec = run_noisy(table_objective({0.3}), cfg);
    ASSERT_TRUE(rec.lambda_tilde_index);
    EXPECT_EQ(*rec.lambda_tilde_index, 0u);
    EXPECT_EQ(*rec.lambda_tilde, std::vector<double>{0.4});
  }
}

TEST(RunNoisy, SeedReplay) {
  const auto cfg = noisy_config(20, 8, 123);
  const auto f = gp_draw(cfg.grid, cfg.kernel, 5);
  const auto a = run_noisy(table_objective(f), cfg);
  const auto b = run_noisy(table_objective(f), cfg);
  EXPECT_EQ(a.lambda_tilde_index, b.lambda_tilde_index);
  EXPECT_EQ(a.v_tilde, b.v_tilde);
  EXPECT_EQ(a.trace.observations.indices, b.trace.observations.indices);
}

TEST(RunNoisy, BudgetAccounting) {
  auto cfg = noisy_config(10, 4);
  const auto f = gp_draw(cfg.grid, cfg.kernel, 1);
  const auto both = run_noisy(table_objective(f), cfg);
  EXPECT_DOUBLE_EQ(both.budget_spent.epsilon, 2.0);
  EXPECT_DOUBLE_EQ(both.budget_spent.delta, 0.2);
  EXPECT_EQ(both.releases.size(), 2u);

  cfg.release = NoisyRelease::HyperparameterOnly;
  const auto hp = run_noisy(table_objective(f), cfg);
  EXPECT_TRUE(hp.lambda_tilde && !hp.v_tilde);
  EXPECT_DOUBLE_EQ(hp.budget_spent.epsilon, 1.0);

  cfg.release = NoisyRelease::ValueOnly;
  const auto value = run_noisy(table_objective(f), cfg);
  EXPECT_TRUE(!value.lambda_tilde && value.v_tilde);
  EXPECT_DOUBLE_EQ(value.budget_spent.delta, 0.1);
}

TEST(RunNoisy, LargeEpsilonSelectsPosteriorArgmax) {
  NoisyRunConfig cfg{HyperparamGrid::lattice(5, {0.0}, {1.0}), {KernelFamily::SquaredExponential, 0.3}};
  cfg.T = 6;
  cfg.budget = {1000.0, 0.1};
  cfg.noise_variance = 0.01;
  cfg.k1 = 1.0;
  cfg.release = NoisyRelease::HyperparameterOnly;
  std::vector<double> f(5);
  for (std::size_t i = 0; i < 5; ++i) f[i] = std::sin(3.0 * cfg.grid.point(i)[0]);
  cfg.gamma_T = info_gain(cfg.grid, cfg.kernel, cfg.noise_variance, cfg.T).gamma_T;
  int hits = 0;
  const int reps = 1000;
  for (int rep = 0; rep < reps; ++rep) {
    cfg.seed = static_cast<std::uint64_t>(rep);
    const auto rec = run_noisy(table_objective(f), cfg);
    Eigen::Index best = 0;
    rec.trace.final_means.maxCoeff(&best);
    hits += *rec.lambda_tilde_index == static_cast<std::size_t>(best);
  }
  EXPECT_GE(hits, 990);
}

TEST(RunNoisy, ObjectiveFailureKeepsPartialLog) {
  const auto cfg = noisy_config(10, 6);
  int calls = 0;
  const Objective failing = [&](std::size_t, std::span<const double>) {
    if (++calls == 4) throw std::runtime_error("pipeline crashed");
    return 0.1 * calls;
  };
  try {
    run_noisy(failing, cfg);
    FAIL() << "expected ObjectiveError";
  } catch (const ObjectiveError& e) {
    EXPECT_EQ(e.step(), 4u);
    EXPECT_EQ(e.partial_log().size(), 3u);
  }
  const Objective nan = [](std::size_t, std::span<const double>) { return std::nan(""); };
  EXPECT_THROW(run_noisy(nan, cfg), ObjectiveError);
}

TEST(ExactBundle, VanishingNoiseReleasesBestValue) {
  ExactRunConfig cfg{HyperparamGrid::lattice(6, {0.0}, {1.0}), {KernelFamily::SquaredExponential, 0.3}};
  cfg.T = 5;
  cfg.tau = 1e6;
  cfg.k1 = 1.0;
  const std::vector<double> f{0.1, 0.5, -0.2, 0.9, 0.3, 0.0};
  const auto rec = run_exact(table_objective(f), cfg);
  EXPECT_EQ(std::get<ExactBundle>(rec.bundle).laplace_scale_f, 0.0);
  double best = -1e300;
  for (std::size_t t = 1; t < rec.trace.observations.size(); ++t) {
    best = std::max(best, rec.trace.observations.values[t]);
  }
  EXPECT_EQ(*rec.f_tilde, rec.trace.best_value);
  EXPECT_EQ(rec.trace.best_value, best);
}

TEST(ExactBundle, UnitScaleAtZeroTau) {
  ExactRunConfig cfg{HyperparamGrid::lattice(3, {0.0}, {1.0}), {KernelFamily::SquaredExponential, 0.3}};
  cfg.tau = 1e-300;
  cfg.k1 = 1.0;
  EXPECT_DOUBLE_EQ(compute_exact_bundle(cfg).laplace_scale_f, 1.0);
}

TEST(ExactBundle, FourDimensionalExponent) {
  ExactRunConfig cfg{HyperparamGrid::lattice(2, {0, 0, 0, 0}, {1, 1, 1, 1}),
                     {KernelFamily::SquaredExponential, 0.3}};
  cfg.tau = 1.0;
  const auto b = compute_exact_bundle(cfg);
  EXPECT_EQ(b.dimension, 4u);
  EXPECT_NEAR(b.Omega, 0.0558330058498623437518869769992, 1e-15);
}

TEST(ExactBundle, ReferenceC) {
  ExactRunConfig cfg{HyperparamGrid::lattice(6, {0, 0}, {1, 1}), {KernelFamily::Matern52, 0.3}};
  cfg.k1 = 0.95;
  EXPECT_NEAR(compute_exact_bundle(cfg).c, 1.14710515751696461414512812896, 1e-14);
}

TEST(ExactBundle, RejectsShortRuns) {
  ExactRunConfig cfg{HyperparamGrid::lattice(3, {0.0}, {1.0}), {KernelFamily::SquaredExponential, 0.3}};
  cfg.T = 1;
  EXPECT_THROW(run_exact(table_objective({0, 0, 0}), cfg), std::invalid_argument);
}

TEST(ExactRun, RepeatedPointsAreNotRefit) {
  ExactRunConfig cfg{HyperparamGrid::lattice(2, {0.0}, {1.0}), {KernelFamily::SquaredExponential, 0.3}};
  cfg.T = 6;
  const auto rec = run_exact(table_objective({0.2, 0.8}), cfg);
  EXPECT_LE(rec.trace.observations.size(), 2u);
  EXPECT_TRUE(rec.f_tilde.has_value());
}

TEST(UtilityBounds, GrowWithFailureExponent) {
  const auto rec = plan_noisy(noisy_config(30, 10));
  const auto small = utility_bounds(rec, 1.0);
  const auto large = utility_bounds(rec, 50.0);
  for (const auto& [name, value] : small.bounds) EXPECT_GT(large.bounds.at(name), value) << name;
  EXPECT_GT(large.confidence, small.confidence);
}

TEST(UtilityBounds, MechanismTermsVanish) {
  ReleaseRecord rec;
  rec.shape = {50, 2, 20, 1e15, 0.1};
  SensitivityBundle b;
  b.beta_T = 9.0;
  b.beta_T1 = 9.5;
  b.Delta = 2.0 * std::sqrt(b.beta_T1);
  rec.bundle = b;
  EXPECT_NEAR(utility_bounds(rec, 1.0).bounds.at("lambda_tilde_gap"), 6.0, 1e-12);
}

TEST(UtilityBounds, DuplicateFormulaPath) {
  const auto cfg = noisy_config(50, 20);
  const auto rec = plan_noisy(cfg);
  const auto& b = std::get<SensitivityBundle>(rec.bundle);
  const double a = 1.5;
  const auto report = utility_bounds(rec, a);

  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double beta_T = 2.0 * std::log(50.0 * 400.0 * pi2 / (3.0 * 0.1));
  const double beta_T1 = 2.0 * std::log(50.0 * 441.0 * pi2 / (3.0 * 0.1));
  const double c = 2.0 * std::sqrt(0.05 * std::log(3.0 * 50.0 / 0.1));
  const double q = std::sqrt(4.0 * std::log(30.0));
  const double C1 = 8.0 / std::log(2.0);
  const double gamma = info_gain(cfg.grid, cfg.kernel, 1.0, 20).gamma_T;
  const double omega = std::sqrt(C1 * 20.0 * beta_T * gamma);
  const double delta_s = 2.0 * std::sqrt(beta_T1) + c;
  const double mech = 2.0 * delta_s * (std::log(50.0) + a);

  EXPECT_DOUBLE_EQ(b.gamma_T, gamma);
  EXPECT_NEAR(b.laplace_scale_v, std::sqrt(C1 * beta_T * gamma) / std::sqrt(20.0) + c + q, 1e-12);
  EXPECT_NEAR(report.bounds.at("lambda_tilde_mechanism_gap"), mech, 1e-10);
  EXPECT_NEAR(report.bounds.at("lambda_tilde_gap"), 2.0 * std::sqrt(beta_T) + q + mech, 1e-10);
  EXPECT_NEAR(report.bounds.at("v_tilde_error"),
              std::sqrt(2.0 * std::log(40.0 / 0.1)) + omega / 20.0 + a * (omega / 20.0 + c + q), 1e-10);
  EXPECT_NEAR(report.confidence, 1.0 - 0.1 - std::exp(-a), 1e-15);
}

LipschitzRunConfig lipschitz_config() {
  LipschitzRunConfig cfg;
  cfg.lambda_min = 0.5;
  cfg.lambda_max = 1.0;
  cfg.epsilon = 1.0;
  cfg.L = 1.0;
  cfg.g_star = 1.0;
  return cfg;
}

TEST(LipschitzBundle, ReferenceScale) {
  EXPECT_NEAR(compute_lipschitz_bundle(lipschitz_config(), 100).laplace_scale, 1.01, 1e-15);
}

TEST(LipschitzBundle, DegenerateRange) {
  auto cfg = lipschitz_config();
  cfg.lambda_max = cfg.lambda_min;
  EXPECT_EQ(compute_lipschitz_bundle(cfg, 100).range_term, 0.0);
}

TEST(LipschitzBundle, RejectsNonPositiveLambdaMin) {
  auto cfg = lipschitz_config();
  cfg.lambda_min = 0.0;
  EXPECT_THROW(compute_lipschitz_bundle(cfg, 100), std::invalid_argument);
}

TEST(LipschitzBundle, UtilityFrequency) {
  const auto rec = plan_lipschitz(lipschitz_config(), 100);
  const auto report = utility_bounds(rec, 2.0);
  const double bound = report.bounds.at("f_tilde_L_error");
  EXPECT_NEAR(bound, 2.02, 1e-14);
  Rng rng(77);
  const double scale = std::get<LipschitzBundle>(rec.bundle).laplace_scale;
  const auto freq = verification::utility_frequency_test(
      [&](std::uint64_t) { return std::abs(laplace_sample(LaplaceScale(scale), rng)); }, bound,
      report.confidence, 10000);
  EXPECT_TRUE(freq.pass) << freq.fraction;
}

TEST(RunLipschitz, EndToEnd) {
  Rng rng(8);
  std::normal_distribution<double> normal;
  const auto make = [&](std::size_t n) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 2);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      x(i, 0) = 0.5 * normal(rng);
      x(i, 1) = 0.5 * normal(rng);
      y(i) = x(i, 0) - x(i, 1) >= 0.0 ? 1.0 : -1.0;
    }
    return LabeledDataset(x, y);
  };
  auto cfg = lipschitz_config();
  cfg.lambda_min = 0.05;
  cfg.T = 6;
  cfg.grid_size = 8;
  for (auto acq : {Acquisition::Ucb, Acquisition::ExpectedImprovement}) {
    cfg.acquisition = acq;
    const auto rec = run_lipschitz(make(60), make(30), cfg);
    ASSERT_TRUE(rec.f_tilde_L);
    EXPECT_EQ(rec.trace.candidate_lambdas.front(), 0.05);
    EXPECT_EQ(rec.trace.candidate_lambdas.back(), 1.0);
    EXPECT_LE(rec.trace.best_value, 0.0);
    EXPECT_DOUBLE_EQ(rec.budget_spent.epsilon, 1.0);
    EXPECT_EQ(rec.budget_spent.delta, 0.0);
  }
}

}  // namespace
}  // namespace dpbo
