#include "config.hpp"

#include "dpbo/common.hpp"
#include "dpbo/gp.hpp"

#include <Eigen/Cholesky>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>

namespace dpbo::cli {
namespace {

using nlohmann::json;

const std::vector<std::string> kKnownFields = {
    "mode", "epsilon", "delta", "grid", "kernel", "T", "sigma2", "k1", "A", "tau", "L", "g_star",
    "lambda_min", "lambda_max", "seed", "release", "utility_a", "objective", "train", "validation",
    "lambda_grid_size", "training_loss", "validation_loss", "acquisition", "mtgp"};

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : "; ") + p;
  return out;
}

/// Reads j[key] into `out` when present, recording a violation on a type error.
template <typename T>
void read(const json& j, const char* key, T& out, std::vector<std::string>& errs,
          const std::string& prefix = "") {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    errs.push_back("field " + prefix + key + " has the wrong type");
  }
}

template <typename T>
void read(const json& j, const char* key, std::optional<T>& out, std::vector<std::string>& errs,
          const std::string& prefix = "") {
  if (!j.contains(key) || j.at(key).is_null()) return;
  T value{};
  read(j, key, value, errs, prefix);
  out = value;
}

template <typename Enum, typename Parse>
void read_enum(const json& j, const char* key, Enum& out, Parse parse,
               std::vector<std::string>& errs) {
  std::string name;
  if (!j.contains(key)) return;
  read(j, key, name, errs);
  try {
    out = parse(name);
  } catch (const std::exception&) {
    errs.push_back("field " + std::string(key) + " has unknown value '" + name + "'");
  }
}

Acquisition acquisition_from_string(std::string_view name) {
  if (name == "ucb") return Acquisition::Ucb;
  if (name == "ei" || name == "expected_improvement") return Acquisition::ExpectedImprovement;
  throw std::invalid_argument("unknown acquisition");
}

std::string_view to_string(Acquisition a) { return a == Acquisition::Ucb ? "ucb" : "ei"; }

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

void check_grid(const GridSpec& g, std::vector<std::string>& errs) {
  if (g.type == "points") {
    if (g.points.empty()) errs.emplace_back("grid.points must be nonempty");
    for (const auto& p : g.points) {
      if (p.size() != g.points.front().size() || p.empty()) {
        errs.emplace_back("grid.points must all have the same nonzero dimension");
        break;
      }
    }
    return;
  }
  if (g.type != "sobol" && g.type != "lattice") {
    errs.push_back("grid.type must be sobol, lattice or points (got '" + g.type + "')");
    return;
  }
  if (g.lower.empty() || g.lower.size() != g.upper.size()) {
    errs.emplace_back("grid.lower and grid.upper must be nonempty and of equal length");
  } else {
    for (std::size_t i = 0; i < g.lower.size(); ++i) {
      if (!(g.upper[i] >= g.lower[i])) errs.emplace_back("grid.upper must be >= grid.lower");
    }
  }
  if (g.type == "sobol" && g.count < 1) errs.emplace_back("grid.count must be >= 1");
  if (g.type == "lattice" && g.per_dim < 1) errs.emplace_back("grid.per_dim must be >= 1");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Noisy: return "noisy";
    case Mode::Exact: return "exact";
    case Mode::Lipschitz: return "lipschitz";
    case Mode::MtgpLikelihood: return "mtgp-likelihood";
  }
  return "unknown";
}

Mode mode_from_string(std::string_view name) {
  if (name == "noisy") return Mode::Noisy;
  if (name == "exact") return Mode::Exact;
  if (name == "lipschitz") return Mode::Lipschitz;
  if (name == "mtgp-likelihood" || name == "mtgp") return Mode::MtgpLikelihood;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "'");
}

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error("invalid config: " + join(violations)), violations_(std::move(violations)) {}

RunConfigFile parse_config_json(const json& j) {
  std::vector<std::string> errs;
  if (!j.is_object()) throw ConfigError({"config must be a JSON object"});
  for (const auto& [key, _] : j.items()) {
    if (std::find(kKnownFields.begin(), kKnownFields.end(), key) == kKnownFields.end()) {
      errs.push_back("unknown field " + key);
    }
  }

  RunConfigFile c;
  if (!j.contains("mode")) {
    errs.emplace_back("field mode is required");
  } else {
    read_enum(j, "mode", c.mode, mode_from_string, errs);
  }
  read(j, "epsilon", c.epsilon, errs);
  read(j, "delta", c.delta, errs);
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    if (!g.is_object()) {
      errs.emplace_back("field grid must be an object");
    } else {
      read(g, "type", c.grid.type, errs, "grid.");
      read(g, "count", c.grid.count, errs, "grid.");
      read(g, "per_dim", c.grid.per_dim, errs, "grid.");
      read(g, "lower", c.grid.lower, errs, "grid.");
      read(g, "upper", c.grid.upper, errs, "grid.");
      read(g, "points", c.grid.points, errs, "grid.");
    }
  }
  if (j.contains("kernel")) {
    const auto& k = j.at("kernel");
    if (!k.is_object()) {
      errs.emplace_back("field kernel must be an object");
    } else {
      read_enum(k, "family", c.kernel_family, kernel_family_from_string, errs);
      read(k, "lengthscale", c.lengthscale, errs, "kernel.");
    }
  }
  read(j, "T", c.T, errs);
  read(j, "sigma2", c.sigma2, errs);
  read(j, "k1", c.k1, errs);
  read(j, "A", c.A, errs);
  read(j, "tau", c.tau, errs);
  read(j, "L", c.L, errs);
  read(j, "g_star", c.g_star, errs);
  read(j, "lambda_min", c.lambda_min, errs);
  read(j, "lambda_max", c.lambda_max, errs);
  read(j, "seed", c.seed, errs);
  read(j, "release", c.release, errs);
  read(j, "utility_a", c.utility_a, errs);
  if (j.contains("objective")) {
    const auto& o = j.at("objective");
    read(o, "type", c.objective.type, errs, "objective.");
    read(o, "seed", c.objective.seed, errs, "objective.");
    read(o, "command", c.objective.command, errs, "objective.");
  }
  read(j, "train", c.train, errs);
  read(j, "validation", c.validation, errs);
  read(j, "lambda_grid_size", c.lambda_grid_size, errs);
  read_enum(j, "training_loss", c.training_loss, training_loss_from_string, errs);
  read_enum(j, "validation_loss", c.validation_loss, validation_loss_from_string, errs);
  read_enum(j, "acquisition", c.acquisition, acquisition_from_string, errs);
  if (j.contains("mtgp")) {
    const auto& m = j.at("mtgp");
    read(m, "pipeline", c.mtgp.pipeline, errs, "mtgp.");
    read(m, "pairs", c.mtgp.pairs, errs, "mtgp.");
    read(m, "settings", c.mtgp.settings, errs, "mtgp.");
    read(m, "true_k1", c.mtgp.true_k1, errs, "mtgp.");
    read(m, "validation_size", c.mtgp.validation_size, errs, "mtgp.");
    read(m, "pool", c.mtgp.pool, errs, "mtgp.");
    read(m, "curve_out", c.mtgp.curve_out, errs, "mtgp.");
  }

  if (!(c.epsilon > 0.0) || !std::isfinite(c.epsilon)) errs.emplace_back("epsilon must be > 0");
  if (!(c.delta > 0.0 && c.delta < 1.0)) errs.emplace_back("delta must be in (0, 1)");
  if (!(c.k1 >= 0.0 && c.k1 <= 1.0)) errs.emplace_back("k1 must be in [0, 1]");
  if (!(c.lengthscale > 0.0)) errs.emplace_back("kernel.lengthscale must be > 0");
  if (!(c.utility_a >= 0.0)) errs.emplace_back("utility_a must be >= 0");
  check_grid(c.grid, errs);

  const std::string mode(to_string(c.mode));
  const auto require = [&](bool present, const char* field) {
    if (!present) errs.push_back(mode + " mode requires " + field);
  };
  switch (c.mode) {
    case Mode::Noisy:
      if (!c.sigma2) c.sigma2 = 1.0;
      if (!(*c.sigma2 > 0.0)) errs.emplace_back("noisy mode requires sigma2 > 0");
      if (c.T < 1) errs.emplace_back("T must be >= 1");
      if (c.release != "both" && c.release != "hyperparameter" && c.release != "value") {
        errs.emplace_back("release must be both, hyperparameter or value");
      }
      break;
    case Mode::Exact:
      require(c.A.has_value(), "A");
      require(c.tau.has_value(), "tau");
      if (c.A && !(*c.A > 0.0)) errs.emplace_back("A must be > 0");
      if (c.tau && !(*c.tau > 0.0)) errs.emplace_back("tau must be > 0");
      if (c.T < 2) errs.emplace_back("exact mode requires T >= 2");
      break;
    case Mode::Lipschitz:
      require(c.L.has_value(), "L");
      require(c.g_star.has_value(), "g_star");
      require(c.lambda_min.has_value(), "lambda_min");
      require(c.lambda_max.has_value(), "lambda_max");
      require(c.train.has_value(), "train");
      require(c.validation.has_value(), "validation");
      if (c.lambda_min && !(*c.lambda_min > 0.0)) errs.emplace_back("lambda_min must be > 0");
      if (c.lambda_min && c.lambda_max && !(*c.lambda_max >= *c.lambda_min)) {
        errs.emplace_back("lambda_max must be >= lambda_min");
      }
      if (c.L && !(*c.L > 0.0)) errs.emplace_back("L must be > 0");
      if (c.g_star && !(*c.g_star > 0.0)) errs.emplace_back("g_star must be > 0");
      if (c.T < 1) errs.emplace_back("T must be >= 1");
      if (c.lambda_grid_size < 1) errs.emplace_back("lambda_grid_size must be >= 1");
      break;
    case Mode::MtgpLikelihood:
      if (c.mtgp.pipeline == "linear") {
        require(c.train.has_value(), "train");
        require(c.mtgp.pool.has_value(), "mtgp.pool");
      } else if (c.mtgp.pipeline != "synthetic") {
        errs.emplace_back("mtgp.pipeline must be synthetic or linear");
      }
      if (c.mtgp.pairs < 1 || c.mtgp.settings < 1) errs.emplace_back("mtgp.pairs and mtgp.settings must be >= 1");
      if (!(c.mtgp.true_k1 >= 0.0 && c.mtgp.true_k1 <= 1.0)) errs.emplace_back("mtgp.true_k1 must be in [0, 1]");
      break;
  }
  if (c.mode == Mode::Noisy || c.mode == Mode::Exact) {
    if (c.objective.type == "command" && c.objective.command.empty()) {
      errs.emplace_back("objective.command must be set for a command objective");
    } else if (c.objective.type != "command" && c.objective.type != "synthetic_gp") {
      errs.emplace_back("objective.type must be synthetic_gp or command");
    }
  }
  if (!errs.empty()) throw ConfigError(std::move(errs));
  return c;
}

RunConfigFile parse_config(const std::filesystem::path& path, const json& overrides,
                           std::optional<std::uint64_t> seed_fallback) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file " + path.string()});
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError({"config file " + path.string() + " is not valid JSON: " + e.what()});
  }
  if (!j.is_object()) throw ConfigError({"config must be a JSON object"});
  j.merge_patch(overrides);
  if (!j.contains("seed") && seed_fallback) j["seed"] = *seed_fallback;

  RunConfigFile c = parse_config_json(j);
  const auto base = path.parent_path();
  const auto fix = [&](std::optional<std::string>& p) {
    if (p) p = resolve(base, *p).string();
  };
  fix(c.train);
  fix(c.validation);
  fix(c.mtgp.pool);
  fix(c.mtgp.curve_out);
  return c;
}

json config_to_json(const RunConfigFile& c) {
  json j;
  j["mode"] = to_string(c.mode);
  j["epsilon"] = c.epsilon;
  j["delta"] = c.delta;
  j["grid"] = {{"type", c.grid.type},   {"count", c.grid.count}, {"per_dim", c.grid.per_dim},
               {"lower", c.grid.lower}, {"upper", c.grid.upper}, {"points", c.grid.points}};
  j["kernel"] = {{"family", to_string(c.kernel_family)}, {"lengthscale", c.lengthscale}};
  j["T"] = c.T;
  j["sigma2"] = optional_json(c.sigma2);
  j["k1"] = c.k1;
  j["A"] = optional_json(c.A);
  j["tau"] = optional_json(c.tau);
  j["L"] = optional_json(c.L);
  j["g_star"] = optional_json(c.g_star);
  j["lambda_min"] = optional_json(c.lambda_min);
  j["lambda_max"] = optional_json(c.lambda_max);
  j["seed"] = c.seed;
  j["release"] = c.release;
  j["utility_a"] = c.utility_a;
  j["objective"] = {{"type", c.objective.type}, {"seed", c.objective.seed}, {"command", c.objective.command}};
  j["train"] = optional_json(c.train);
  j["validation"] = optional_json(c.validation);
  j["lambda_grid_size"] = c.lambda_grid_size;
  j["training_loss"] = to_string(c.training_loss);
  j["validation_loss"] = to_string(c.validation_loss);
  j["acquisition"] = to_string(c.acquisition);
  j["mtgp"] = {{"pipeline", c.mtgp.pipeline},
               {"pairs", c.mtgp.pairs},
               {"settings", c.mtgp.settings},
               {"true_k1", c.mtgp.true_k1},
               {"validation_size", c.mtgp.validation_size},
               {"pool", optional_json(c.mtgp.pool)},
               {"curve_out", optional_json(c.mtgp.curve_out)}};
  return j;
}

HyperparamGrid make_grid(const GridSpec& spec) {
  if (spec.type == "points") return HyperparamGrid::from_points(spec.points);
  if (spec.type == "lattice") return HyperparamGrid::lattice(spec.per_dim, spec.lower, spec.upper);
  return HyperparamGrid::sobol(spec.count, spec.lower, spec.upper);
}

KernelParams make_kernel(const RunConfigFile& c) { return {c.kernel_family, c.lengthscale}; }

NoisyRunConfig make_noisy(const RunConfigFile& c) {
  NoisyRunConfig cfg{make_grid(c.grid), make_kernel(c)};
  cfg.T = c.T;
  cfg.budget = {c.epsilon, c.delta};
  cfg.noise_variance = c.sigma2.value_or(1.0);
  cfg.k1 = c.k1;
  cfg.seed = c.seed;
  cfg.release = c.release == "hyperparameter" ? NoisyRelease::HyperparameterOnly
                : c.release == "value"        ? NoisyRelease::ValueOnly
                                              : NoisyRelease::Both;
  return cfg;
}

ExactRunConfig make_exact(const RunConfigFile& c) {
  ExactRunConfig cfg{make_grid(c.grid), make_kernel(c)};
  cfg.T = c.T;
  cfg.budget = {c.epsilon, c.delta};
  cfg.A = c.A.value_or(1.0);
  cfg.tau = c.tau.value_or(1.0);
  cfg.k1 = c.k1;
  cfg.seed = c.seed;
  return cfg;
}

LipschitzRunConfig make_lipschitz(const RunConfigFile& c) {
  LipschitzRunConfig cfg;
  cfg.lambda_min = c.lambda_min.value_or(0.0);
  cfg.lambda_max = c.lambda_max.value_or(0.0);
  cfg.grid_size = c.lambda_grid_size;
  cfg.T = c.T;
  cfg.epsilon = c.epsilon;
  cfg.L = c.L.value_or(0.0);
  cfg.g_star = c.g_star.value_or(0.0);
  cfg.training_loss = c.training_loss;
  cfg.validation_loss = c.validation_loss;
  cfg.acquisition = c.acquisition;
  cfg.seed = c.seed;
  return cfg;
}

LabeledDataset read_csv_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": missing header row");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  const auto header = split_csv(line);
  const auto label_it = std::find(header.begin(), header.end(), "label");
  if (label_it == header.end()) throw std::runtime_error(path.string() + ": no 'label' column");
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());

  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    const std::string where = path.string() + ": row " + std::to_string(row_number);
    if (cells.size() != header.size()) {
      throw std::runtime_error(where + ": expected " + std::to_string(header.size()) +
                               " columns, found " + std::to_string(cells.size()));
    }
    std::vector<double> features;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      double v = 0.0;
      const auto& cell = cells[k];
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty() || !std::isfinite(v)) {
        throw std::runtime_error(where + ": column '" + header[k] + "' is not a number");
      }
      if (k == label_col) {
        if (v != 1.0 && v != -1.0) throw std::runtime_error(where + ": label must be +1 or -1");
        labels.push_back(v);
      } else {
        features.push_back(v);
      }
    }
    rows.push_back(std::move(features));
  }
  if (rows.empty()) throw std::runtime_error(path.string() + ": no data rows");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size() - 1));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
  }
  return {std::move(x), Eigen::Map<Eigen::VectorXd>(labels.data(), static_cast<Eigen::Index>(labels.size()))};
}

Objective make_objective(const RunConfigFile& c, const HyperparamGrid& grid, double noise_variance) {
  if (c.objective.type == "command") {
    const std::string command = c.objective.command;
    return [command](std::size_t, std::span<const double> point) {
      std::string cmd = command;
      for (double x : point) {
        std::array<char, 32> buf{};
        std::snprintf(buf.data(), buf.size(), " %.17g", x);
        cmd += buf.data();
      }
      std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
      if (!pipe) throw std::runtime_error("cannot start objective command");
      std::string output;
      std::array<char, 256> buf{};
      while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe.get())) output += buf.data();
      const int status = pclose(pipe.release());
      if (status != 0) throw std::runtime_error("objective command exited with status " + std::to_string(status));
      return std::stod(output);
    };
  }

  // One fixed draw f ~ GP(0, k) over the grid, then N(0, sigma2) per evaluation.
  Eigen::MatrixXd k = gram_matrix(grid.points(), make_kernel(c));
  k.diagonal().array() += 1e-8;
  const Eigen::LLT<Eigen::MatrixXd> llt(k);
  Rng rng(c.objective.seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(k.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  auto f = std::make_shared<Eigen::VectorXd>(llt.matrixL() * z);
  auto noise_rng = std::make_shared<Rng>(c.objective.seed ^ 0xD1B54A32D192ED03ULL);
  const double sd = std::sqrt(noise_variance);
  return [f, noise_rng, sd](std::size_t idx, std::span<const double>) {
    const double clean = (*f)(static_cast<Eigen::Index>(idx));
    if (sd == 0.0) return clean;
    std::normal_distribution<double> noise(0.0, sd);
    return clean + noise(*noise_rng);
  };
}

}  // namespace dpbo::cli
