#pragma once

#include "dpbo/acquisition.hpp"
#include "dpbo/common.hpp"
#include "dpbo/convex_train.hpp"
#include "dpbo/gp.hpp"
#include "dpbo/grid.hpp"
#include "dpbo/kernels.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace dpbo {

struct PrivacyBudget {
  double epsilon = 1.0;
  double delta = 0.1;
};

/// Sum rule for sequential releases on the same validation set.
PrivacyBudget compose_budget(const std::vector<PrivacyBudget>& releases);

/// Black-box validation gain at a grid point. Called once per optimization
/// step, in step order.
using Objective = std::function<double(std::size_t grid_index, std::span<const double> point)>;

/// Raised when the objective throws or returns a non-finite value. Carries
/// the observations gathered before the failure.
class ObjectiveError : public std::runtime_error {
 public:
  ObjectiveError(const std::string& what, std::size_t step, ObservationLog partial)
      : std::runtime_error(what), step_(step), partial_(std::move(partial)) {}

  std::size_t step() const noexcept { return step_; }
  const ObservationLog& partial_log() const noexcept { return partial_; }

 private:
  std::size_t step_;
  ObservationLog partial_;
};

enum class NoisyRelease { Both, HyperparameterOnly, ValueOnly };

/// Inputs of the noisy-observation release (best hyper-parameter and best
/// observed gain).
struct NoisyRunConfig {
  HyperparamGrid grid;
  KernelParams kernel;
  std::size_t T = 10;
  PrivacyBudget budget;
  double noise_variance = 1.0;
  double k1 = 1.0;
  std::uint64_t seed = 0;
  /// Maximum information gain. Computed with the greedy bound when unset.
  std::optional<double> gamma_T;
  NoisyRelease release = NoisyRelease::Both;

  void validate() const;
};

/// Every derived constant of a noisy run.
struct SensitivityBundle {
  double beta_T = 0.0;
  double beta_T1 = 0.0;
  double c = 0.0;
  double q = 0.0;
  double C1 = 0.0;
  double gamma_T = 0.0;
  InfoGainMethod gamma_method = InfoGainMethod::GreedyScaled;
  double Omega = 0.0;
  /// Exponential-mechanism sensitivity 2 sqrt(beta_{T+1}) + c.
  double Delta = 0.0;
  /// Laplace scale sqrt(C1 beta_T gamma_T)/(eps sqrt T) + c/eps + q/eps.
  double laplace_scale_v = 0.0;
};

SensitivityBundle compute_bundle(const NoisyRunConfig& cfg, const InfoGainBound& gamma);

/// Inputs of the noise-free release of the best function value.
struct ExactRunConfig {
  HyperparamGrid grid;
  KernelParams kernel;
  std::size_t T = 10;
  PrivacyBudget budget;
  /// Constants of the noise-free regret bound, supplied by the caller.
  double A = 1.0;
  double tau = 1.0;
  double k1 = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ExactBundle {
  double A = 0.0;
  double tau = 0.0;
  std::size_t dimension = 0;
  double c = 0.0;
  /// A exp(-2 tau / (log 2)^(d/4)).
  double Omega = 0.0;
  double laplace_scale_f = 0.0;
};

ExactBundle compute_exact_bundle(const ExactRunConfig& cfg);

enum class Acquisition { Ucb, ExpectedImprovement };

/// Inputs of the Lipschitz/convex release over regularization strengths.
struct LipschitzRunConfig {
  double lambda_min = 0.01;
  double lambda_max = 1.0;
  /// Candidate regularization values, log-spaced over [lambda_min, lambda_max].
  std::size_t grid_size = 20;
  std::size_t T = 10;
  double epsilon = 1.0;
  double L = 1.0;
  double g_star = 1.0;
  TrainingLoss training_loss = TrainingLoss::Logistic;
  ValidationLoss validation_loss = ValidationLoss::Ramp;
  Acquisition acquisition = Acquisition::Ucb;
  /// Surrogate model over normalized log(lambda); any choice keeps privacy.
  KernelParams kernel{KernelFamily::SquaredExponential, 0.2};
  double model_noise = 1e-4;
  std::uint64_t seed = 0;
  TrainOptions train_options;

  void validate() const;
};

struct LipschitzBundle {
  double L = 0.0;
  double g_star = 0.0;
  std::size_t m = 0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  /// min{g*/m, L/(m lambda_min)}.
  double dataset_term = 0.0;
  /// (lambda_max - lambda_min) L / (lambda_max lambda_min).
  double range_term = 0.0;
  double laplace_scale = 0.0;
};

LipschitzBundle compute_lipschitz_bundle(const LipschitzRunConfig& cfg, std::size_t m);

enum class Algorithm { Noisy, Exact, Lipschitz };
std::string_view to_string(Algorithm algorithm);

/// Non-private record of the optimization itself; never serialized with a release.
struct RunTrace {
  ObservationLog observations;
  /// Posterior mean over the grid after the last step.
  Eigen::VectorXd final_means;
  /// Unprivatized released quantity (v*, max_{t>=2} f, or f^BO).
  double best_value = 0.0;
  /// Regularization values for the Lipschitz run.
  std::vector<double> candidate_lambdas;
};

struct ReleaseEntry {
  std::string name;
  PrivacyBudget budget;
};

struct RunShape {
  std::size_t grid_size = 0;
  std::size_t dimension = 0;
  std::size_t T = 0;
  double epsilon = 0.0;
  double delta = 0.0;
};

struct ReleaseRecord {
  Algorithm algorithm = Algorithm::Noisy;
  std::uint64_t seed = 0;
  RunShape shape;

  std::optional<std::size_t> lambda_tilde_index;
  std::optional<std::vector<double>> lambda_tilde;
  std::optional<double> v_tilde;
  std::optional<double> f_tilde;
  std::optional<double> f_tilde_L;

  std::variant<SensitivityBundle, ExactBundle, LipschitzBundle> bundle;
  std::vector<ReleaseEntry> releases;
  PrivacyBudget budget_spent;
  std::vector<std::string> notes;

  RunTrace trace;
};

ReleaseRecord run_noisy(const Objective& objective, const NoisyRunConfig& cfg);
ReleaseRecord run_exact(const Objective& objective, const ExactRunConfig& cfg);
ReleaseRecord run_lipschitz(const LabeledDataset& train, const LabeledDataset& val,
                            const LipschitzRunConfig& cfg);

struct UtilityReport {
  double failure_exponent = 0.0;
  /// Probability with which every bound in `bounds` holds.
  double confidence = 0.0;
  std::map<std::string, double> bounds;
};

/// High-probability accuracy bounds for the released quantities.
/// Noisy: lambda_tilde_mechanism_gap, lambda_tilde_gap, v_tilde_error.
/// Exact: f_tilde_error. Lipschitz: f_tilde_L_error.
UtilityReport utility_bounds(const ReleaseRecord& record, double a);

/// Records carrying only the derived constants of a configuration, with no
/// optimization run and nothing released. Useful for inspecting noise scales
/// and utility bounds up front.
ReleaseRecord plan_noisy(const NoisyRunConfig& cfg);
ReleaseRecord plan_exact(const ExactRunConfig& cfg);
ReleaseRecord plan_lipschitz(const LipschitzRunConfig& cfg, std::size_t validation_size);

}  // namespace dpbo
