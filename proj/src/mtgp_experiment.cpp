#include "dpbo/mtgp_experiment.hpp"

#include "dpbo/common.hpp"
#include "dpbo/sobol.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace dpbo {

void EvalMatrices::validate() const {
  if (F_V.rows() != F_Vprime.rows() || F_V.cols() != F_Vprime.cols()) {
    throw std::invalid_argument("evaluation matrices differ in shape");
  }
  if (F_V.cols() != hyperparams.cols()) {
    throw std::invalid_argument("evaluation matrices and settings differ in column count");
  }
  if (!F_V.allFinite() || !F_Vprime.allFinite()) {
    throw std::invalid_argument("evaluation matrices contain non-finite entries");
  }
}

namespace {

Eigen::MatrixXd task_kronecker(double k1, const Eigen::MatrixXd& k2, double jitter) {
  const Eigen::Index s = k2.rows();
  Eigen::MatrixXd joint(2 * s, 2 * s);
  joint.topLeftCorner(s, s) = k2;
  joint.bottomRightCorner(s, s) = k2;
  joint.topRightCorner(s, s) = k1 * k2;
  joint.bottomLeftCorner(s, s) = k1 * k2;
  joint.diagonal().array() += jitter;
  return joint;
}

Eigen::VectorXd standard_normal(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
  return z;
}

}  // namespace

MultiTaskGpPipeline::MultiTaskGpPipeline(double true_k1, KernelParams k2, double noise_variance,
                                         std::size_t dimension)
    : k1_(true_k1), k2_(k2), noise_(noise_variance), dimension_(dimension) {
  if (!(true_k1 >= 0.0 && true_k1 <= 1.0)) throw std::invalid_argument("true k1 must lie in [0, 1]");
  if (!(noise_variance >= 0.0)) throw std::invalid_argument("noise variance must be >= 0");
  if (dimension < 1) throw std::invalid_argument("setting dimension must be >= 1");
  k2_.validate();
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> MultiTaskGpPipeline::evaluate_pair(
    std::size_t, const Eigen::MatrixXd& settings, Rng& rng) {
  if (cached_settings_.size() != settings.size() || cached_settings_ != settings) {
    // Generation only needs some square root of the covariance; the tiny
    // floor keeps the factorization defined when the noise is zero.
    Eigen::MatrixXd joint =
        task_kronecker(k1_, gram_matrix(settings, k2_), std::max(noise_, 1e-12));
    Eigen::LLT<Eigen::MatrixXd> llt(joint);
    if (llt.info() != Eigen::Success) throw SingularModelError("multi-task generator covariance not PD");
    cached_factor_ = llt.matrixL();
    cached_settings_ = settings;
  }
  const Eigen::Index s = settings.cols();
  const Eigen::VectorXd draw = cached_factor_ * standard_normal(2 * s, rng);
  return {draw.head(s), draw.tail(s)};
}

double accuracy(const Eigen::VectorXd& w, const LabeledDataset& data) {
  if (data.size() == 0) throw std::invalid_argument("accuracy: empty dataset");
  const Eigen::VectorXd scores = data.features() * w;
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const double predicted = scores(i) >= 0.0 ? 1.0 : -1.0;
    correct += predicted == data.labels()(i) ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

LinearModelPipeline::LinearModelPipeline(LabeledDataset train, LabeledDataset pool,
                                         std::size_t validation_size, TrainingLoss loss)
    : train_(std::move(train)), pool_(std::move(pool)), validation_size_(validation_size), loss_(loss) {
  if (train_.size() == 0) throw std::invalid_argument("linear pipeline: empty training set");
  if (train_.dimension() != pool_.dimension()) {
    throw std::invalid_argument("linear pipeline: training and pool dimensions differ");
  }
  if (validation_size_ < 2 || validation_size_ >= pool_.size()) {
    throw std::invalid_argument(
        "linear pipeline: validation size must be >= 2 and smaller than the pool");
  }
}

void LinearModelPipeline::train_models(const Eigen::MatrixXd& settings) {
  if (settings.rows() != 2) throw std::invalid_argument("linear pipeline: settings must be 2-D");
  models_.clear();
  const auto n = train_.size();
  for (Eigen::Index j = 0; j < settings.cols(); ++j) {
    const double lambda = std::pow(10.0, 3.0 * settings(0, j) - 3.0);
    const double frac = 0.2 + 0.8 * settings(1, j);
    const auto rows = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(frac * static_cast<double>(n))));
    std::vector<std::size_t> idx(std::min(rows, n));
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    models_.push_back(train_erm(train_.subset(idx), lambda, loss_).w);
  }
  trained_for_ = settings;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> LinearModelPipeline::evaluate_pair(
    std::size_t, const Eigen::MatrixXd& settings, Rng& rng) {
  if (trained_for_.size() != settings.size() || trained_for_ != settings) train_models(settings);

  std::vector<std::size_t> order(pool_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates: first validation_size_ + 1 entries are a uniform sample.
  for (std::size_t i = 0; i <= validation_size_; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  const std::vector<std::size_t> base(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(validation_size_));
  std::vector<std::size_t> neighbour = base;
  if (std::bernoulli_distribution(0.5)(rng)) {
    std::uniform_int_distribution<std::size_t> drop(0, neighbour.size() - 1);
    neighbour.erase(neighbour.begin() + static_cast<std::ptrdiff_t>(drop(rng)));
  } else {
    neighbour.push_back(order[validation_size_]);
  }
  const LabeledDataset v = pool_.subset(base);
  const LabeledDataset vp = pool_.subset(neighbour);
  Eigen::VectorXd a(settings.cols());
  Eigen::VectorXd b(settings.cols());
  for (Eigen::Index j = 0; j < settings.cols(); ++j) {
    a(j) = accuracy(models_[static_cast<std::size_t>(j)], v);
    b(j) = accuracy(models_[static_cast<std::size_t>(j)], vp);
  }
  return {a, b};
}

EvalMatrices build_matrices(std::size_t pair_count, std::size_t setting_count,
                            EvaluationPipeline& pipeline, std::uint64_t seed) {
  if (pair_count < 1 || setting_count < 1) {
    throw std::invalid_argument("build_matrices: pair and setting counts must be >= 1");
  }
  EvalMatrices mats;
  mats.hyperparams = sobol_points(pipeline.setting_dimension(), setting_count);
  const auto p = static_cast<Eigen::Index>(pair_count);
  const auto s = static_cast<Eigen::Index>(setting_count);
  mats.F_V.resize(p, s);
  mats.F_Vprime.resize(p, s);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < p; ++i) {
    try {
      auto [row, row_prime] = pipeline.evaluate_pair(static_cast<std::size_t>(i), mats.hyperparams, rng);
      if (row.size() != s || row_prime.size() != s) {
        throw std::runtime_error("pipeline returned a row of the wrong length");
      }
      mats.F_V.row(i) = row.transpose();
      mats.F_Vprime.row(i) = row_prime.transpose();
    } catch (const std::exception& e) {
      throw std::runtime_error("build_matrices: pipeline failed on row " + std::to_string(i) + ": " +
                               e.what());
    }
  }
  mats.validate();
  return mats;
}

double LikelihoodCurve::argmax() const {
  if (loglik.empty()) throw std::logic_error("empty likelihood curve");
  const auto it = std::max_element(loglik.begin(), loglik.end());
  return k1_values[static_cast<std::size_t>(it - loglik.begin())];
}

std::vector<double> default_k1_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(static_cast<double>(i) * 5.0 / 100.0);
  return grid;
}

namespace {

double curve_point(const EvalMatrices& mats, const Eigen::MatrixXd& k2, double k1, double jitter) {
  const Eigen::MatrixXd joint = task_kronecker(k1, k2, jitter);
  Eigen::LLT<Eigen::MatrixXd> llt(joint);
  if (llt.info() != Eigen::Success) {
    throw SingularModelError("likelihood_curve: joint covariance is not positive definite at k1=" +
                             std::to_string(k1));
  }
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const auto dim = static_cast<double>(joint.rows());
  const double constant = -0.5 * log_det - 0.5 * dim * std::log(2.0 * std::numbers::pi);
  const Eigen::Index s = k2.rows();
  double total = 0.0;
  Eigen::VectorXd y(2 * s);
  for (Eigen::Index i = 0; i < mats.F_V.rows(); ++i) {
    y.head(s) = mats.F_V.row(i).transpose();
    y.tail(s) = mats.F_Vprime.row(i).transpose();
    total += constant - 0.5 * llt.matrixL().solve(y).squaredNorm();
  }
  return total;
}

}  // namespace

double multitask_loglik(const EvalMatrices& mats, const KernelParams& k2, double k1, double jitter) {
  mats.validate();
  if (!(k1 >= 0.0 && k1 <= 1.0)) throw std::invalid_argument("multitask_loglik: k1 must lie in [0, 1]");
  return curve_point(mats, gram_matrix(mats.hyperparams, k2), k1, jitter);
}

LikelihoodCurve likelihood_curve(const EvalMatrices& mats, const KernelParams& k2,
                                 const std::vector<double>& k1_grid, double jitter) {
  mats.validate();
  if (k1_grid.empty()) throw std::invalid_argument("likelihood_curve: empty k1 grid");
  for (std::size_t i = 0; i < k1_grid.size(); ++i) {
    if (!(k1_grid[i] > 0.0 && k1_grid[i] < 1.0)) {
      throw std::invalid_argument("likelihood_curve: k1 values must lie in (0, 1)");
    }
    if (i > 0 && !(k1_grid[i] > k1_grid[i - 1])) {
      throw std::invalid_argument("likelihood_curve: k1 grid must be strictly increasing");
    }
  }
  const Eigen::MatrixXd gram = gram_matrix(mats.hyperparams, k2);
  LikelihoodCurve curve;
  curve.k1_values = k1_grid;
  for (double k1 : k1_grid) curve.loglik.push_back(curve_point(mats, gram, k1, jitter));
  return curve;
}

namespace {

std::string shortest(double x) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return {buf.data(), res.ptr};
}

}  // namespace

void write_curve_csv(const LikelihoodCurve& curve, std::ostream& out) {
  out << "k1,loglik\n";
  for (std::size_t i = 0; i < curve.k1_values.size(); ++i) {
    out << shortest(curve.k1_values[i]) << ',' << shortest(curve.loglik[i]) << '\n';
  }
}

void write_matrices_csv(const EvalMatrices& mats, std::ostream& out) {
  out << "pair,setting,f_v,f_vprime\n";
  for (Eigen::Index i = 0; i < mats.F_V.rows(); ++i) {
    for (Eigen::Index j = 0; j < mats.F_V.cols(); ++j) {
      out << i << ',' << j << ',' << shortest(mats.F_V(i, j)) << ',' << shortest(mats.F_Vprime(i, j)) << '\n';
    }
  }
}

}  // namespace dpbo
