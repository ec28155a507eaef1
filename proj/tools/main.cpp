// dpbo: private hyper-parameter release from the command line.
#include "config.hpp"
#include "json_io.hpp"
#include "verify_suite.hpp"

#include "dpbo/dp_release.hpp"
#include "dpbo/mtgp_experiment.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using nlohmann::json;
using namespace dpbo;
using namespace dpbo::cli;

struct Flags {
  std::string config;
  std::string mode;
  std::optional<double> eps;
  std::optional<double> delta;
  std::optional<std::size_t> T;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma2;
  std::optional<double> k1;
  std::string out;
  std::string curve;
  std::size_t repeat = 1;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  app->add_option("--mode", f.mode, "noisy | exact | lipschitz | mtgp-likelihood");
  app->add_option("--eps", f.eps, "privacy epsilon");
  app->add_option("--delta", f.delta, "privacy delta");
  app->add_option("--T", f.T, "optimization steps");
  app->add_option("--seed", f.seed, "64-bit seed (fallback: DPBO_SEED)");
  app->add_option("--sigma2", f.sigma2, "observation noise variance");
  app->add_option("--k1", f.k1, "validation-set similarity k1 in [0, 1]");
  app->add_option("--out", f.out, "write the result JSON here instead of stdout");
}

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("DPBO_SEED");
  if (!s || !*s) return std::nullopt;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != std::string(s).size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError({"DPBO_SEED must be an unsigned 64-bit integer"});
  }
}

RunConfigFile load(const Flags& f, std::optional<std::string> forced_mode = std::nullopt) {
  json overrides = json::object();
  if (!f.mode.empty()) overrides["mode"] = f.mode;
  if (forced_mode) overrides["mode"] = *forced_mode;
  if (f.eps) overrides["epsilon"] = *f.eps;
  if (f.delta) overrides["delta"] = *f.delta;
  if (f.T) overrides["T"] = *f.T;
  if (f.seed) overrides["seed"] = *f.seed;
  if (f.sigma2) overrides["sigma2"] = *f.sigma2;
  if (f.k1) overrides["k1"] = *f.k1;
  if (!f.config.empty()) return parse_config(f.config, overrides, env_seed());
  if (!overrides.contains("seed")) {
    if (auto s = env_seed()) overrides["seed"] = *s;
  }
  return parse_config_json(overrides);
}

void emit(const json& j, const std::string& out) {
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + out);
  file << text;
}

json run_once(const RunConfigFile& c) {
  ReleaseRecord rec;
  switch (c.mode) {
    case Mode::Noisy: {
      const auto cfg = make_noisy(c);
      rec = run_noisy(make_objective(c, cfg.grid, cfg.noise_variance), cfg);
      break;
    }
    case Mode::Exact: {
      const auto cfg = make_exact(c);
      rec = run_exact(make_objective(c, cfg.grid, 0.0), cfg);
      break;
    }
    case Mode::Lipschitz:
      rec = run_lipschitz(read_csv_dataset(*c.train), read_csv_dataset(*c.validation), make_lipschitz(c));
      break;
    case Mode::MtgpLikelihood:
      throw std::logic_error("mtgp-likelihood is handled separately");
  }
  json j = record_to_json(rec, utility_bounds(rec, c.utility_a));
  j["config"] = config_to_json(c);
  return j;
}

json plan(const RunConfigFile& c) {
  ReleaseRecord rec;
  switch (c.mode) {
    case Mode::Noisy: rec = plan_noisy(make_noisy(c)); break;
    case Mode::Exact: rec = plan_exact(make_exact(c)); break;
    case Mode::Lipschitz:
      rec = plan_lipschitz(make_lipschitz(c), read_csv_dataset(*c.validation).size());
      break;
    case Mode::MtgpLikelihood:
      throw ConfigError({"bounds is not defined for mtgp-likelihood mode"});
  }
  json j = record_to_json(rec, utility_bounds(rec, c.utility_a));
  j["config"] = config_to_json(c);
  return j;
}

json run_mtgp(const RunConfigFile& c, const Flags& f) {
  const KernelParams k2 = make_kernel(c);
  EvalMatrices mats;
  if (c.mtgp.pipeline == "linear") {
    LinearModelPipeline pipeline(read_csv_dataset(*c.train), read_csv_dataset(*c.mtgp.pool),
                                 c.mtgp.validation_size, c.training_loss);
    mats = build_matrices(c.mtgp.pairs, c.mtgp.settings, pipeline, c.seed);
  } else {
    MultiTaskGpPipeline pipeline(c.mtgp.true_k1, k2);
    mats = build_matrices(c.mtgp.pairs, c.mtgp.settings, pipeline, c.seed);
  }
  const auto curve = likelihood_curve(mats, k2, default_k1_grid());

  std::string curve_path = f.curve.empty() ? c.mtgp.curve_out.value_or("") : f.curve;
  if (curve_path.empty() && !f.out.empty()) {
    curve_path = std::filesystem::path(f.out).replace_extension(".csv").string();
  }
  if (!curve_path.empty()) {
    std::ofstream file(curve_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + curve_path);
    write_curve_csv(curve, file);
  }
  json j;
  j["schema_version"] = kSchemaVersion;
  j["mode"] = to_string(c.mode);
  j["seed"] = c.seed;
  j["curve"] = curve_to_json(curve);
  j["curve_csv"] = curve_path.empty() ? json(nullptr) : json(curve_path);
  j["config"] = config_to_json(c);
  return j;
}

json error_json(std::string_view type, const std::string& message) {
  return {{"schema_version", kSchemaVersion}, {"error", {{"type", type}, {"message", message}}}};
}

int fail(const json& j, int code) {
  std::cerr << j.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private release of Bayesian-optimized hyper-parameters"};
  app.require_subcommand(1);
  Flags f;
  auto* run = app.add_subcommand("run", "run the optimization and release");
  auto* verify = app.add_subcommand("verify", "check the library against reference oracles");
  auto* mtgp = app.add_subcommand("mtgp", "likelihood curve over k1");
  auto* bounds = app.add_subcommand("bounds", "constants and utility bounds without running");
  for (auto* sub : {run, verify, mtgp, bounds}) add_common(sub, f);
  run->add_option("--repeat", f.repeat, "independent runs with seeds seed, seed+1, ...")
      ->check(CLI::PositiveNumber);
  mtgp->add_option("--curve", f.curve, "k1,loglik CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(error_json("usage", e.what()), 2);
  }

  try {
    if (verify->parsed()) {
      std::uint64_t seed = f.seed.value_or(env_seed().value_or(0));
      const json report = run_verification_suite(seed);
      emit(report, f.out);
      return report.at("pass").get<bool>() ? 0 : 1;
    }
    if (mtgp->parsed()) {
      emit(run_mtgp(load(f, "mtgp-likelihood"), f), f.out);
      return 0;
    }
    const RunConfigFile c = load(f);
    if (bounds->parsed()) {
      emit(plan(c), f.out);
      return 0;
    }
    if (c.mode == Mode::MtgpLikelihood) {
      emit(run_mtgp(c, f), f.out);
      return 0;
    }
    if (f.repeat == 1) {
      emit(run_once(c), f.out);
      return 0;
    }
    json runs = json::array();
    for (std::size_t i = 0; i < f.repeat; ++i) {
      RunConfigFile ci = c;
      ci.seed = c.seed + i;
      runs.push_back(run_once(ci));
    }
    emit({{"schema_version", kSchemaVersion}, {"repeat", f.repeat}, {"runs", runs}}, f.out);
    return 0;
  } catch (const ConfigError& e) {
    json j = error_json("config", e.what());
    j["error"]["violations"] = e.violations();
    return fail(j, 2);
  } catch (const ObjectiveError& e) {
    json j = error_json("objective", e.what());
    j["error"]["step"] = e.step();
    return fail(j, 1);
  } catch (const std::exception& e) {
    return fail(error_json("runtime", e.what()), 1);
  }
}
