#include "verify_suite.hpp"

#include "config.hpp"
#include "json_io.hpp"

#include "dpbo/acquisition.hpp"
#include "dpbo/gp.hpp"
#include "dpbo/mechanisms.hpp"
#include "dpbo/verification.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace dpbo::cli {

using nlohmann::json;
namespace v = verification;

namespace {

HyperparamGrid random_grid(std::size_t n, std::size_t d, Rng& rng) {
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts(i) = uniform_open01(rng);
  return HyperparamGrid(pts);
}

json gp_oracle_check(Rng& rng) {
  double worst = 0.0;
  const int instances = 10;
  for (int k = 0; k < instances; ++k) {
    const std::size_t d = 1 + rng() % 3;
    const auto grid = random_grid(25, d, rng);
    const KernelParams params{k % 2 ? KernelFamily::Matern52 : KernelFamily::SquaredExponential,
                              0.3 + 0.5 * uniform_open01(rng)};
    ObservationLog obs;
    obs.noise_variance = 0.01 + uniform_open01(rng);
    std::normal_distribution<double> normal;
    for (std::size_t t = 0; t < 1 + rng() % 20; ++t) obs.add(rng() % grid.size(), normal(rng));
    const auto post = GPPosterior::fit(grid, params, obs);
    const auto ref = v::gp_predict_naive(grid, params, obs);
    worst = std::max({worst, (post.means() - ref.means).cwiseAbs().maxCoeff(),
                      (post.variances() - ref.variances).cwiseAbs().maxCoeff()});
  }
  return {{"name", "gp_oracle"}, {"instances", instances}, {"max_abs_diff", worst},
          {"tolerance", 1e-8}, {"pass", worst <= 1e-8}};
}

json info_gain_check(Rng& rng) {
  bool pass = true;
  const int instances = 5;
  for (int k = 0; k < instances; ++k) {
    const auto grid = random_grid(8, 2, rng);
    const KernelParams params{KernelFamily::SquaredExponential, 0.4};
    const double scaled = info_gain(grid, params, 0.5, 3).gamma_T;
    const double exact = v::info_gain_exact(grid, params, 0.5, 3);
    const double shrink = 1.0 - std::exp(-1.0);
    pass = pass && exact <= scaled * (1.0 + 1e-12) && scaled * shrink <= exact * (1.0 + 1e-12);
  }
  return {{"name", "info_gain_sandwich"}, {"instances", instances}, {"pass", pass}};
}

}  // namespace

json run_verification_suite(std::uint64_t seed) {
  Rng rng(seed);
  json checks = json::array();
  checks.push_back(gp_oracle_check(rng));
  checks.push_back(info_gain_check(rng));

  const std::size_t samples = 100000;
  const double eps = 1.0;
  auto laplace = v::dp_ratio_test([&](Rng& r) { return laplace_release(0.0, 1.0, eps, r); },
                                  [&](Rng& r) { return laplace_release(1.0, 1.0, eps, r); }, eps,
                                  0.0, samples, v::BinSpec::quantile(50), v::kDefaultDpSlack, seed);
  json lj = report_to_json(laplace);
  lj["name"] = "laplace_dp";
  checks.push_back(lj);

  const ScoredCandidates v_scores{{1.0, 0.0, 0.5}, 1.0, eps};
  const ScoredCandidates vp_scores{{0.0, 1.0, 0.5}, 1.0, eps};
  auto expo = v::dp_ratio_test(
      [&](Rng& r) { return static_cast<double>(exponential_select(v_scores, r)); },
      [&](Rng& r) { return static_cast<double>(exponential_select(vp_scores, r)); }, eps, 0.0,
      samples, v::BinSpec::categorical(3), v::kDefaultDpSlack, seed + 1);
  json ej = report_to_json(expo);
  ej["name"] = "exponential_dp";
  checks.push_back(ej);

  Rng tail_rng(seed + 2);
  auto tail = v::utility_frequency_test(
      [&](std::uint64_t) { return std::abs(laplace_sample(LaplaceScale(1.0), tail_rng)); }, 1.0,
      1.0 - std::exp(-1.0), 10000);
  json tj = report_to_json(tail);
  tj["name"] = "laplace_tail";
  checks.push_back(tj);

  bool all = true;
  for (const auto& c : checks) all = all && c.at("pass").get<bool>();
  return {{"schema_version", kSchemaVersion}, {"seed", seed}, {"checks", checks}, {"pass", all}};
}

}  // namespace dpbo::cli
