#include "dpbo/dp_release.hpp"

#include "dpbo/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace dpbo {

PrivacyBudget compose_budget(const std::vector<PrivacyBudget>& releases) {
  if (releases.empty()) throw std::invalid_argument("compose_budget: no releases");
  PrivacyBudget total{0.0, 0.0};
  for (const auto& r : releases) {
    total.epsilon += r.epsilon;
    total.delta += r.delta;
  }
  return total;
}

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Noisy: return "noisy";
    case Algorithm::Exact: return "exact";
    case Algorithm::Lipschitz: return "lipschitz";
  }
  return "unknown";
}

namespace {

void check_budget(const PrivacyBudget& b) {
  if (!(b.epsilon > 0.0) || !std::isfinite(b.epsilon)) {
    throw std::invalid_argument("privacy budget: epsilon must be > 0");
  }
  if (!(b.delta > 0.0 && b.delta < 1.0)) {
    throw std::invalid_argument("privacy budget: delta must lie in (0, 1)");
  }
}

void check_k1(double k1) {
  if (!(k1 >= 0.0 && k1 <= 1.0)) throw std::invalid_argument("k1 must lie in [0, 1]");
}

/// Shared sequential design loop. Noise-free runs do not refit on a grid
/// point already observed: the repeat carries no new information and would
/// make K_T singular.
struct LoopOutcome {
  ObservationLog log;
  std::vector<double> values;  // one per step, including repeats
  GPPosterior posterior;
};

using Selector = std::function<std::size_t(const GPPosterior&, std::size_t step,
                                           const ObservationLog&)>;

LoopOutcome run_loop(const Objective& objective, const HyperparamGrid& grid,
                     const KernelParams& kernel, double noise_variance, std::size_t steps,
                     const Selector& select) {
  ObservationLog log;
  log.noise_variance = noise_variance;
  std::vector<double> values;
  std::set<std::size_t> seen;
  GPPosterior post = GPPosterior::fit(grid, kernel, log);
  for (std::size_t t = 1; t <= steps; ++t) {
    const std::size_t idx = select(post, t, log);
    double v = 0.0;
    try {
      v = objective(idx, grid.point(idx));
    } catch (const std::exception& e) {
      throw ObjectiveError(std::string("objective failed at step ") + std::to_string(t) + ": " +
                               e.what(),
                           t, log);
    }
    if (!std::isfinite(v)) {
      throw ObjectiveError("objective returned a non-finite value at step " + std::to_string(t), t,
                           log);
    }
    values.push_back(v);
    if (noise_variance == 0.0 && !seen.insert(idx).second) continue;
    log.add(idx, v);
    post = GPPosterior::fit(grid, kernel, log);
  }
  return {std::move(log), std::move(values), std::move(post)};
}

RunShape shape_of(const HyperparamGrid& grid, std::size_t T, double eps, double delta) {
  return {grid.size(), grid.dimension(), T, eps, delta};
}

}  // namespace

void NoisyRunConfig::validate() const {
  kernel.validate();
  check_budget(budget);
  check_k1(k1);
  if (T < 1) throw std::invalid_argument("noisy run: T must be >= 1");
  if (!(noise_variance > 0.0) || !std::isfinite(noise_variance)) {
    throw std::invalid_argument(
        "noisy run: sigma^2 must be > 0 (use the noise-free release for exact observations)");
  }
  if (gamma_T && !(*gamma_T >= 0.0)) throw std::invalid_argument("noisy run: gamma_T must be >= 0");
}

SensitivityBundle compute_bundle(const NoisyRunConfig& cfg, const InfoGainBound& gamma) {
  cfg.validate();
  const BetaSchedule schedule{cfg.grid.size(), cfg.budget.delta};
  const double n = static_cast<double>(cfg.grid.size());
  const double T = static_cast<double>(cfg.T);
  const double delta = cfg.budget.delta;
  const double eps = cfg.budget.epsilon;
  const double sigma = std::sqrt(cfg.noise_variance);

  SensitivityBundle b;
  b.beta_T = beta(cfg.T, schedule);
  b.beta_T1 = beta(cfg.T + 1, schedule);
  b.c = 2.0 * std::sqrt((1.0 - cfg.k1) * std::log(3.0 * n / delta));
  b.q = sigma * std::sqrt(4.0 * std::log(3.0 / delta));
  b.C1 = 8.0 / std::log1p(1.0 / cfg.noise_variance);
  b.gamma_T = gamma.gamma_T;
  b.gamma_method = gamma.method;
  b.Omega = std::sqrt(b.C1 * T * b.beta_T * b.gamma_T);
  b.Delta = 2.0 * std::sqrt(b.beta_T1) + b.c;
  b.laplace_scale_v =
      std::sqrt(b.C1 * b.beta_T * b.gamma_T) / (eps * std::sqrt(T)) + b.c / eps + b.q / eps;
  return b;
}

namespace {

InfoGainBound resolve_gamma(const NoisyRunConfig& cfg) {
  if (cfg.gamma_T) return {*cfg.gamma_T, InfoGainMethod::GreedyScaled};
  return info_gain(cfg.grid, cfg.kernel, cfg.noise_variance, cfg.T, InfoGainMethod::GreedyScaled);
}

std::vector<std::string> noisy_notes(const NoisyRunConfig& cfg) {
  std::vector<std::string> notes;
  notes.emplace_back(
      "lambda_tilde sensitivity uses beta_{T+1}; the lambda_tilde accuracy bound uses beta_T");
  if (cfg.gamma_T) notes.emplace_back("gamma_T supplied by the caller");
  return notes;
}

}  // namespace

ReleaseRecord plan_noisy(const NoisyRunConfig& cfg) {
  cfg.validate();
  ReleaseRecord rec;
  rec.algorithm = Algorithm::Noisy;
  rec.seed = cfg.seed;
  rec.shape = shape_of(cfg.grid, cfg.T, cfg.budget.epsilon, cfg.budget.delta);
  rec.bundle = compute_bundle(cfg, resolve_gamma(cfg));
  rec.budget_spent = {0.0, 0.0};
  rec.notes = noisy_notes(cfg);
  return rec;
}

ReleaseRecord run_noisy(const Objective& objective, const NoisyRunConfig& cfg) {
  ReleaseRecord rec = plan_noisy(cfg);
  const auto& bundle = std::get<SensitivityBundle>(rec.bundle);
  const BetaSchedule schedule{cfg.grid.size(), cfg.budget.delta};

  auto loop = run_loop(objective, cfg.grid, cfg.kernel, cfg.noise_variance, cfg.T,
                       [&](const GPPosterior& post, std::size_t t, const ObservationLog&) {
                         return ucb_select(post, beta(t, schedule));
                       });

  Rng rng(cfg.seed);
  const double v_star = *std::max_element(loop.values.begin(), loop.values.end());
  if (cfg.release != NoisyRelease::ValueOnly) {
    const auto& mu = loop.posterior.means();
    ScoredCandidates cands{{mu.data(), mu.data() + mu.size()}, bundle.Delta, cfg.budget.epsilon};
    const std::size_t idx = exponential_select(cands, rng);
    rec.lambda_tilde_index = idx;
    rec.lambda_tilde = cfg.grid.point_vector(idx);
    rec.releases.push_back({"lambda_tilde", cfg.budget});
  }
  if (cfg.release != NoisyRelease::HyperparameterOnly) {
    rec.v_tilde = v_star + laplace_sample(LaplaceScale(bundle.laplace_scale_v), rng);
    rec.releases.push_back({"v_tilde", cfg.budget});
  }
  std::vector<PrivacyBudget> spent;
  for (const auto& r : rec.releases) spent.push_back(r.budget);
  rec.budget_spent = compose_budget(spent);

  rec.trace.observations = std::move(loop.log);
  rec.trace.final_means = loop.posterior.means();
  rec.trace.best_value = v_star;
  return rec;
}

void ExactRunConfig::validate() const {
  kernel.validate();
  check_budget(budget);
  check_k1(k1);
  if (T < 2) throw std::invalid_argument("noise-free run: T must be >= 2 (the release maximizes over t >= 2)");
  if (!(A > 0.0) || !std::isfinite(A)) throw std::invalid_argument("noise-free run: A must be > 0");
  if (!(tau > 0.0)) throw std::invalid_argument("noise-free run: tau must be > 0");
}

ExactBundle compute_exact_bundle(const ExactRunConfig& cfg) {
  cfg.validate();
  const double n = static_cast<double>(cfg.grid.size());
  const double eps = cfg.budget.epsilon;
  ExactBundle b;
  b.A = cfg.A;
  b.tau = cfg.tau;
  b.dimension = cfg.grid.dimension();
  b.c = 2.0 * std::sqrt((1.0 - cfg.k1) * std::log(2.0 * n / cfg.budget.delta));
  const double denom = std::pow(std::numbers::ln2, static_cast<double>(b.dimension) / 4.0);
  b.Omega = cfg.A * std::exp(-2.0 * cfg.tau / denom);
  b.laplace_scale_f = b.Omega / eps + b.c / eps;
  return b;
}

ReleaseRecord plan_exact(const ExactRunConfig& cfg) {
  ReleaseRecord rec;
  rec.algorithm = Algorithm::Exact;
  rec.seed = cfg.seed;
  rec.bundle = compute_exact_bundle(cfg);
  rec.shape = shape_of(cfg.grid, cfg.T, cfg.budget.epsilon, cfg.budget.delta);
  rec.budget_spent = {0.0, 0.0};
  rec.notes.emplace_back(
      "optimization engine: noise-free GP-UCB; A and tau enter only the noise scale");
  return rec;
}

ReleaseRecord run_exact(const Objective& objective, const ExactRunConfig& cfg) {
  ReleaseRecord rec = plan_exact(cfg);
  const auto& bundle = std::get<ExactBundle>(rec.bundle);
  const BetaSchedule schedule{cfg.grid.size(), cfg.budget.delta};

  auto loop = run_loop(objective, cfg.grid, cfg.kernel, 0.0, cfg.T,
                       [&](const GPPosterior& post, std::size_t t, const ObservationLog&) {
                         return ucb_select(post, beta(t, schedule));
                       });

  const double best = *std::max_element(loop.values.begin() + 1, loop.values.end());
  Rng rng(cfg.seed);
  rec.f_tilde = best + laplace_sample(LaplaceScale(bundle.laplace_scale_f), rng);
  rec.releases.push_back({"f_tilde", cfg.budget});
  rec.budget_spent = cfg.budget;

  rec.trace.observations = std::move(loop.log);
  rec.trace.final_means = loop.posterior.means();
  rec.trace.best_value = best;
  return rec;
}

void LipschitzRunConfig::validate() const {
  if (!(lambda_min > 0.0)) {
    throw std::invalid_argument("lipschitz run: lambda_min must be > 0 (the sensitivity diverges)");
  }
  if (!(lambda_max >= lambda_min) || !std::isfinite(lambda_max)) {
    throw std::invalid_argument("lipschitz run: lambda_max must be >= lambda_min");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("lipschitz run: epsilon must be > 0");
  if (!(L > 0.0)) throw std::invalid_argument("lipschitz run: L must be > 0");
  if (!(g_star > 0.0)) throw std::invalid_argument("lipschitz run: g_star must be > 0");
  if (T < 1) throw std::invalid_argument("lipschitz run: T must be >= 1");
  if (grid_size < 1) throw std::invalid_argument("lipschitz run: grid_size must be >= 1");
  if (!(model_noise > 0.0)) throw std::invalid_argument("lipschitz run: model_noise must be > 0");
  kernel.validate();
}

LipschitzBundle compute_lipschitz_bundle(const LipschitzRunConfig& cfg, std::size_t m) {
  cfg.validate();
  if (m < 1) throw std::invalid_argument("lipschitz run: validation set must be nonempty");
  LipschitzBundle b;
  b.L = cfg.L;
  b.g_star = cfg.g_star;
  b.m = m;
  b.lambda_min = cfg.lambda_min;
  b.lambda_max = cfg.lambda_max;
  const double md = static_cast<double>(m);
  b.dataset_term = std::min(cfg.g_star / md, cfg.L / (md * cfg.lambda_min));
  b.range_term = (cfg.lambda_max - cfg.lambda_min) * cfg.L / (cfg.lambda_max * cfg.lambda_min);
  b.laplace_scale = b.dataset_term / cfg.epsilon + b.range_term / cfg.epsilon;
  return b;
}

ReleaseRecord plan_lipschitz(const LipschitzRunConfig& cfg, std::size_t validation_size) {
  ReleaseRecord rec;
  rec.algorithm = Algorithm::Lipschitz;
  rec.seed = cfg.seed;
  rec.bundle = compute_lipschitz_bundle(cfg, validation_size);
  const std::size_t grid = cfg.lambda_min == cfg.lambda_max ? 1 : cfg.grid_size;
  rec.shape = {grid, 1, cfg.T, cfg.epsilon, 0.0};
  rec.budget_spent = {0.0, 0.0};
  return rec;
}

ReleaseRecord run_lipschitz(const LabeledDataset& train, const LabeledDataset& val,
                            const LipschitzRunConfig& cfg) {
  ReleaseRecord rec = plan_lipschitz(cfg, val.size());
  const auto& bundle = std::get<LipschitzBundle>(rec.bundle);
  if (train.size() == 0) throw std::invalid_argument("lipschitz run: empty training set");
  if (train.dimension() != val.dimension()) {
    throw std::invalid_argument("lipschitz run: training and validation dimensions differ");
  }

  // Candidates log-spaced in lambda; the surrogate sees log(lambda) rescaled to [0, 1].
  const std::size_t count = rec.shape.grid_size;
  std::vector<double> lambdas(count);
  Eigen::MatrixXd coords(1, static_cast<Eigen::Index>(count));
  const double lo = std::log(cfg.lambda_min);
  const double hi = std::log(cfg.lambda_max);
  for (std::size_t i = 0; i < count; ++i) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    lambdas[i] = std::exp(lo + frac * (hi - lo));
    coords(0, static_cast<Eigen::Index>(i)) = frac;
  }
  lambdas.front() = cfg.lambda_min;
  if (count > 1) lambdas.back() = cfg.lambda_max;
  const HyperparamGrid grid(coords);

  const Objective objective = [&](std::size_t idx, std::span<const double>) {
    const auto model = train_erm(train, lambdas[idx], cfg.training_loss, cfg.train_options);
    return validation_score(model, val, cfg.validation_loss);
  };
  // Exploration schedule for the surrogate only; it carries no privacy role here.
  const BetaSchedule schedule{count, 0.1};
  auto loop = run_loop(objective, grid, cfg.kernel, cfg.model_noise, cfg.T,
                       [&](const GPPosterior& post, std::size_t t, const ObservationLog& log) {
                         if (cfg.acquisition == Acquisition::Ucb || log.size() == 0) {
                           return ucb_select(post, beta(t, schedule));
                         }
                         const double incumbent =
                             *std::max_element(log.values.begin(), log.values.end());
                         return expected_improvement_select(post, incumbent);
                       });

  const double f_bo = *std::max_element(loop.values.begin(), loop.values.end());
  Rng rng(cfg.seed);
  rec.f_tilde_L = f_bo + laplace_sample(LaplaceScale(bundle.laplace_scale), rng);
  rec.releases.push_back({"f_tilde_L", {cfg.epsilon, 0.0}});
  rec.budget_spent = {cfg.epsilon, 0.0};

  rec.trace.observations = std::move(loop.log);
  rec.trace.final_means = loop.posterior.means();
  rec.trace.best_value = f_bo;
  rec.trace.candidate_lambdas = std::move(lambdas);
  return rec;
}

UtilityReport utility_bounds(const ReleaseRecord& record, double a) {
  if (!(a >= 0.0)) throw std::invalid_argument("utility_bounds: failure exponent must be >= 0");
  UtilityReport report;
  report.failure_exponent = a;
  const auto& s = record.shape;
  const double eps = s.epsilon;

  if (const auto* b = std::get_if<SensitivityBundle>(&record.bundle)) {
    const double T = static_cast<double>(s.T);
    const double mech = (2.0 * b->Delta / eps) * (std::log(static_cast<double>(s.grid_size)) + a);
    report.bounds["lambda_tilde_mechanism_gap"] = mech;
    report.bounds["lambda_tilde_gap"] = 2.0 * std::sqrt(b->beta_T) + b->q + mech;
    report.bounds["v_tilde_error"] = std::sqrt(2.0 * std::log(2.0 * T / s.delta)) + b->Omega / T +
                                     a * (b->Omega / (eps * T) + b->c / eps + b->q / eps);
    report.confidence = 1.0 - (s.delta + std::exp(-a));
  } else if (const auto* e = std::get_if<ExactBundle>(&record.bundle)) {
    report.bounds["f_tilde_error"] = e->Omega + a * (e->Omega / eps + e->c / eps);
    report.confidence = 1.0 - (s.delta + std::exp(-a));
  } else {
    const auto& l = std::get<LipschitzBundle>(record.bundle);
    report.bounds["f_tilde_L_error"] = a * l.laplace_scale;
    report.confidence = 1.0 - std::exp(-a);
  }
  return report;
}

}  // namespace dpbo
