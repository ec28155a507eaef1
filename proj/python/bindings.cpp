// Python bindings for the core operations. Release records come back as dicts
// in the same layout the CLI writes.
#include "dpbo/acquisition.hpp"
#include "dpbo/convex_train.hpp"
#include "dpbo/dp_release.hpp"
#include "dpbo/gp.hpp"
#include "dpbo/mechanisms.hpp"
#include "dpbo/mtgp_experiment.hpp"
#include "json_io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace dpbo;
using cli::curve_to_json;
using cli::record_to_json;

namespace {

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::object record_dict(const ReleaseRecord& record, double a) {
  return to_python(record_to_json(record, utility_bounds(record, a)));
}

KernelParams kernel(const std::string& family, double lengthscale) {
  KernelParams p{kernel_family_from_string(family), lengthscale};
  p.validate();
  return p;
}

HyperparamGrid grid_from(const Eigen::MatrixXd& points) {
  // Callers pass one point per row.
  return HyperparamGrid(points.transpose());
}

Objective wrap(py::function fn) {
  return [fn](std::size_t idx, std::span<const double> point) {
    py::gil_scoped_acquire gil;
    return fn(idx, std::vector<double>(point.begin(), point.end())).cast<double>();
  };
}

NoisyRelease noisy_release(const std::string& name) {
  if (name == "both") return NoisyRelease::Both;
  if (name == "hyperparameter") return NoisyRelease::HyperparameterOnly;
  if (name == "value") return NoisyRelease::ValueOnly;
  throw std::invalid_argument("release must be both, hyperparameter or value");
}

NoisyRunConfig noisy_config(const Eigen::MatrixXd& points, const std::string& family, double lengthscale,
                            std::size_t T, double epsilon, double delta, double sigma2, double k1,
                            std::uint64_t seed, const std::string& release) {
  NoisyRunConfig cfg{grid_from(points), kernel(family, lengthscale)};
  cfg.T = T;
  cfg.budget = {epsilon, delta};
  cfg.noise_variance = sigma2;
  cfg.k1 = k1;
  cfg.seed = seed;
  cfg.release = noisy_release(release);
  return cfg;
}

ExactRunConfig exact_config(const Eigen::MatrixXd& points, const std::string& family, double lengthscale,
                            std::size_t T, double epsilon, double delta, double A, double tau, double k1,
                            std::uint64_t seed) {
  ExactRunConfig cfg{grid_from(points), kernel(family, lengthscale)};
  cfg.T = T;
  cfg.budget = {epsilon, delta};
  cfg.A = A;
  cfg.tau = tau;
  cfg.k1 = k1;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_dpbo, m) {
  m.doc() = "Differentially private Bayesian optimization over a finite grid";
  py::register_exception<ObjectiveError>(m, "ObjectiveError", PyExc_RuntimeError);

  m.def("sobol_grid", [](std::size_t count, const std::vector<double>& lower, const std::vector<double>& upper) {
    return Eigen::MatrixXd(HyperparamGrid::sobol(count, lower, upper).points().transpose());
  }, py::arg("count"), py::arg("lower"), py::arg("upper"), "Unscrambled Sobol points, one per row.");
  m.def("lattice_grid", [](std::size_t per_dim, const std::vector<double>& lower, const std::vector<double>& upper) {
    return Eigen::MatrixXd(HyperparamGrid::lattice(per_dim, lower, upper).points().transpose());
  }, py::arg("per_dim"), py::arg("lower"), py::arg("upper"));

  m.def("k2", [](const std::vector<double>& a, const std::vector<double>& b, const std::string& family,
                 double lengthscale) { return k2_eval(a, b, kernel(family, lengthscale)); },
        py::arg("a"), py::arg("b"), py::arg("family") = "se", py::arg("lengthscale") = 1.0);
  m.def("gram", [](const Eigen::MatrixXd& points, const std::string& family, double lengthscale) {
    return gram_matrix(points.transpose(), kernel(family, lengthscale));
  }, py::arg("points"), py::arg("family") = "se", py::arg("lengthscale") = 1.0);

  m.def("gp_posterior", [](const Eigen::MatrixXd& points, const std::vector<std::size_t>& indices,
                           const std::vector<double>& values, double sigma2, const std::string& family,
                           double lengthscale) {
    ObservationLog obs;
    obs.noise_variance = sigma2;
    if (indices.size() != values.size()) throw std::invalid_argument("indices and values differ in length");
    for (std::size_t i = 0; i < indices.size(); ++i) obs.add(indices[i], values[i]);
    const auto post = GPPosterior::fit(grid_from(points), kernel(family, lengthscale), obs);
    return std::make_pair(post.means(), post.variances());
  }, py::arg("points"), py::arg("indices"), py::arg("values"), py::arg("sigma2"),
     py::arg("family") = "se", py::arg("lengthscale") = 1.0,
     "Posterior (means, variances) over every grid point.");

  m.def("beta", [](std::size_t t, std::size_t grid_size, double delta) {
    return beta(t, BetaSchedule{grid_size, delta});
  }, py::arg("t"), py::arg("grid_size"), py::arg("delta"));
  m.def("ucb_select", py::overload_cast<const Eigen::VectorXd&, const Eigen::VectorXd&, double>(&ucb_select),
        py::arg("means"), py::arg("variances"), py::arg("beta"));
  m.def("info_gain", [](const Eigen::MatrixXd& points, double sigma2, std::size_t T, const std::string& family,
                        double lengthscale, bool exact) {
    return info_gain(grid_from(points), kernel(family, lengthscale), sigma2, T,
                     exact ? InfoGainMethod::ExactBruteForce : InfoGainMethod::GreedyScaled).gamma_T;
  }, py::arg("points"), py::arg("sigma2"), py::arg("T"), py::arg("family") = "se",
     py::arg("lengthscale") = 1.0, py::arg("exact") = false);

  m.def("laplace_samples", [](double scale, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    const LaplaceScale b(scale);
    Eigen::VectorXd out(static_cast<Eigen::Index>(n));
    for (auto& x : out) x = laplace_sample(b, rng);
    return out;
  }, py::arg("scale"), py::arg("n"), py::arg("seed") = 0);
  m.def("exponential_probabilities", [](const std::vector<double>& scores, double sensitivity, double epsilon) {
    return exponential_probabilities({scores, sensitivity, epsilon});
  }, py::arg("scores"), py::arg("sensitivity"), py::arg("epsilon"));
  m.def("exponential_select", [](const std::vector<double>& scores, double sensitivity, double epsilon,
                                 std::uint64_t seed) {
    Rng rng(seed);
    return exponential_select({scores, sensitivity, epsilon}, rng);
  }, py::arg("scores"), py::arg("sensitivity"), py::arg("epsilon"), py::arg("seed") = 0);

  m.def("run_noisy", [](py::function objective, const Eigen::MatrixXd& points, std::size_t T, double epsilon,
                        double delta, double sigma2, double k1, std::uint64_t seed, const std::string& family,
                        double lengthscale, const std::string& release, double a) {
    const auto cfg = noisy_config(points, family, lengthscale, T, epsilon, delta, sigma2, k1, seed, release);
    return record_dict(run_noisy(wrap(objective), cfg), a);
  }, py::arg("objective"), py::arg("points"), py::arg("T"), py::arg("epsilon"), py::arg("delta"),
     py::arg("sigma2") = 1.0, py::arg("k1") = 1.0, py::arg("seed") = 0, py::arg("family") = "se",
     py::arg("lengthscale") = 0.2, py::arg("release") = "both", py::arg("a") = 1.0,
     "Optimize objective(index, point) and release the best point and value privately.");
  m.def("plan_noisy", [](const Eigen::MatrixXd& points, std::size_t T, double epsilon, double delta,
                         double sigma2, double k1, const std::string& family, double lengthscale, double a) {
    const auto cfg = noisy_config(points, family, lengthscale, T, epsilon, delta, sigma2, k1, 0, "both");
    return record_dict(plan_noisy(cfg), a);
  }, py::arg("points"), py::arg("T"), py::arg("epsilon"), py::arg("delta"), py::arg("sigma2") = 1.0,
     py::arg("k1") = 1.0, py::arg("family") = "se", py::arg("lengthscale") = 0.2, py::arg("a") = 1.0);
  m.def("run_exact", [](py::function objective, const Eigen::MatrixXd& points, std::size_t T, double epsilon,
                        double delta, double A, double tau, double k1, std::uint64_t seed,
                        const std::string& family, double lengthscale, double a) {
    const auto cfg = exact_config(points, family, lengthscale, T, epsilon, delta, A, tau, k1, seed);
    return record_dict(run_exact(wrap(objective), cfg), a);
  }, py::arg("objective"), py::arg("points"), py::arg("T"), py::arg("epsilon"), py::arg("delta"),
     py::arg("A"), py::arg("tau"), py::arg("k1") = 1.0, py::arg("seed") = 0, py::arg("family") = "se",
     py::arg("lengthscale") = 0.2, py::arg("a") = 1.0);
  m.def("run_lipschitz", [](const Eigen::MatrixXd& train_x, const Eigen::VectorXd& train_y,
                            const Eigen::MatrixXd& val_x, const Eigen::VectorXd& val_y, double lambda_min,
                            double lambda_max, std::size_t T, double epsilon, double L, double g_star,
                            std::size_t grid_size, const std::string& training_loss,
                            const std::string& validation_loss, std::uint64_t seed, double a) {
    LipschitzRunConfig cfg;
    cfg.lambda_min = lambda_min;
    cfg.lambda_max = lambda_max;
    cfg.T = T;
    cfg.epsilon = epsilon;
    cfg.L = L;
    cfg.g_star = g_star;
    cfg.grid_size = grid_size;
    cfg.training_loss = training_loss_from_string(training_loss);
    cfg.validation_loss = validation_loss_from_string(validation_loss);
    cfg.seed = seed;
    return record_dict(run_lipschitz({train_x, train_y}, {val_x, val_y}, cfg), a);
  }, py::arg("train_x"), py::arg("train_y"), py::arg("val_x"), py::arg("val_y"), py::arg("lambda_min"),
     py::arg("lambda_max"), py::arg("T"), py::arg("epsilon"), py::arg("L") = 1.0, py::arg("g_star") = 1.0,
     py::arg("grid_size") = 20, py::arg("training_loss") = "logistic", py::arg("validation_loss") = "ramp",
     py::arg("seed") = 0, py::arg("a") = 1.0);

  m.def("train_erm", [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                        const std::string& loss) {
    return train_erm({x, y}, lambda, training_loss_from_string(loss)).w;
  }, py::arg("x"), py::arg("y"), py::arg("lam"), py::arg("loss") = "logistic");
  m.def("stability_bound", &stability_bound, py::arg("lam"), py::arg("lam_prime"), py::arg("L"),
        py::arg("g_star"), py::arg("m"), py::arg("lambda_min"));

  m.def("synthetic_matrices", [](std::size_t pairs, std::size_t settings, double true_k1, double lengthscale,
                                 std::uint64_t seed) {
    MultiTaskGpPipeline pipeline(true_k1, kernel("se", lengthscale));
    const auto mats = build_matrices(pairs, settings, pipeline, seed);
    return py::make_tuple(mats.F_V, mats.F_Vprime, mats.hyperparams);
  }, py::arg("pairs"), py::arg("settings"), py::arg("true_k1"), py::arg("lengthscale") = 0.3,
     py::arg("seed") = 0, "(F_V, F_Vprime, hyperparams) from the multi-task GP pipeline.");
  m.def("likelihood_curve", [](const Eigen::MatrixXd& f_v, const Eigen::MatrixXd& f_vp,
                               const Eigen::MatrixXd& hyperparams, double lengthscale,
                               std::optional<std::vector<double>> k1_values) {
    const EvalMatrices mats{f_v, f_vp, hyperparams};
    return to_python(curve_to_json(
        likelihood_curve(mats, kernel("se", lengthscale), k1_values.value_or(default_k1_grid()))));
  }, py::arg("F_V"), py::arg("F_Vprime"), py::arg("hyperparams"), py::arg("lengthscale") = 0.3,
     py::arg("k1_values") = py::none());
}
