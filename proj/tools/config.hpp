#pragma once

#include "dpbo/convex_train.hpp"
#include "dpbo/dp_release.hpp"
#include "dpbo/grid.hpp"
#include "dpbo/kernels.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpbo::cli {

inline constexpr int kSchemaVersion = 1;

enum class Mode { Noisy, Exact, Lipschitz, MtgpLikelihood };

std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view name);

/// Every violated constraint of a configuration, one message each.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

struct GridSpec {
  /// "sobol", "lattice" or "points".
  std::string type = "sobol";
  std::size_t count = 50;
  std::size_t per_dim = 5;
  std::vector<double> lower{0.0, 0.0};
  std::vector<double> upper{1.0, 1.0};
  std::vector<std::vector<double>> points;

  bool operator==(const GridSpec&) const = default;
};

struct ObjectiveSpec {
  /// "synthetic_gp": a fixed draw from the GP prior over the grid.
  /// "command": a shell command given the point coordinates as arguments,
  /// printing the gain on standard output.
  std::string type = "synthetic_gp";
  std::uint64_t seed = 1;
  std::string command;

  bool operator==(const ObjectiveSpec&) const = default;
};

struct MtgpSpec {
  /// "synthetic" (multi-task GP draws) or "linear" (classifiers on `train`/`pool` data).
  std::string pipeline = "synthetic";
  std::size_t pairs = 25;
  std::size_t settings = 20;
  double true_k1 = 0.8;
  std::size_t validation_size = 50;
  std::optional<std::string> pool;
  std::optional<std::string> curve_out;

  bool operator==(const MtgpSpec&) const = default;
};

struct RunConfigFile {
  Mode mode = Mode::Noisy;
  double epsilon = 1.0;
  double delta = 0.1;
  GridSpec grid;
  KernelFamily kernel_family = KernelFamily::SquaredExponential;
  double lengthscale = 0.2;
  std::size_t T = 20;
  std::optional<double> sigma2;
  double k1 = 1.0;
  std::optional<double> A;
  std::optional<double> tau;
  std::optional<double> L;
  std::optional<double> g_star;
  std::optional<double> lambda_min;
  std::optional<double> lambda_max;
  std::uint64_t seed = 0;
  /// "both", "hyperparameter" or "value" (noisy mode).
  std::string release = "both";
  /// Failure exponent of the reported utility bounds.
  double utility_a = 1.0;
  ObjectiveSpec objective;
  std::optional<std::string> train;
  std::optional<std::string> validation;
  std::size_t lambda_grid_size = 20;
  TrainingLoss training_loss = TrainingLoss::Logistic;
  ValidationLoss validation_loss = ValidationLoss::Ramp;
  Acquisition acquisition = Acquisition::Ucb;
  MtgpSpec mtgp;

  bool operator==(const RunConfigFile&) const = default;
};

/// Builds and validates a configuration from a JSON object. Missing fields
/// take their defaults; data paths are taken as given.
RunConfigFile parse_config_json(const nlohmann::json& j);
/// Reads a JSON file, applies `overrides` on top (JSON merge patch), and
/// validates. Relative data paths resolve against the file's directory.
/// `seed_fallback` is used only when neither the file nor the overrides set a seed.
RunConfigFile parse_config(const std::filesystem::path& path,
                           const nlohmann::json& overrides = nlohmann::json::object(),
                           std::optional<std::uint64_t> seed_fallback = std::nullopt);
/// Defaults-expanded form; parse_config_json(config_to_json(c)) == c.
nlohmann::json config_to_json(const RunConfigFile& config);

HyperparamGrid make_grid(const GridSpec& spec);
KernelParams make_kernel(const RunConfigFile& config);
NoisyRunConfig make_noisy(const RunConfigFile& config);
ExactRunConfig make_exact(const RunConfigFile& config);
LipschitzRunConfig make_lipschitz(const RunConfigFile& config);

/// Header row required; the `label` column holds +1/-1 and every other column
/// is a numeric feature. Errors name the offending row.
LabeledDataset read_csv_dataset(const std::filesystem::path& path);

/// Objective described by `config.objective` over `grid`. Synthetic draws add
/// N(0, sigma2) observation noise when `noise_variance` > 0.
Objective make_objective(const RunConfigFile& config, const HyperparamGrid& grid,
                         double noise_variance);

}  // namespace dpbo::cli
