#pragma once

#include "dpbo/common.hpp"
#include "dpbo/convex_train.hpp"
#include "dpbo/kernels.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

namespace dpbo {

/// Scores of s hyper-parameter settings on p validation sets (F_V) and on
/// their neighbours (F_Vprime).
struct EvalMatrices {
  Eigen::MatrixXd F_V;
  Eigen::MatrixXd F_Vprime;
  /// d x s, one setting per column.
  Eigen::MatrixXd hyperparams;

  void validate() const;
};

/// Produces one row pair of the evaluation matrices.
class EvaluationPipeline {
 public:
  virtual ~EvaluationPipeline() = default;

  virtual std::size_t setting_dimension() const = 0;
  /// Scores of every setting (columns of `settings`) on validation set
  /// `pair_index` and on its neighbour.
  virtual std::pair<Eigen::VectorXd, Eigen::VectorXd> evaluate_pair(
      std::size_t pair_index, const Eigen::MatrixXd& settings, Rng& rng) = 0;
};

/// Draws each row pair from a multi-task GP with task covariance
/// [[1, k1], [k1, 1]] and hyper-parameter kernel k2, plus white noise.
class MultiTaskGpPipeline final : public EvaluationPipeline {
 public:
  MultiTaskGpPipeline(double true_k1, KernelParams k2, double noise_variance = 1e-6,
                      std::size_t dimension = 2);

  std::size_t setting_dimension() const override { return dimension_; }
  std::pair<Eigen::VectorXd, Eigen::VectorXd> evaluate_pair(std::size_t pair_index,
                                                            const Eigen::MatrixXd& settings,
                                                            Rng& rng) override;

 private:
  double k1_;
  KernelParams k2_;
  double noise_;
  std::size_t dimension_;
  Eigen::MatrixXd cached_settings_;
  Eigen::MatrixXd cached_factor_;
};

/// Linear classifiers trained on a fixed training set and scored by accuracy
/// on validation sets sampled from a pool. A setting (h1, h2) in [0, 1]^2 maps
/// to lambda = 10^(3 h1 - 3) and to the leading fraction 0.2 + 0.8 h2 of the
/// training rows. Each neighbour adds or removes one random record.
class LinearModelPipeline final : public EvaluationPipeline {
 public:
  LinearModelPipeline(LabeledDataset train, LabeledDataset pool, std::size_t validation_size,
                      TrainingLoss loss = TrainingLoss::Logistic);

  std::size_t setting_dimension() const override { return 2; }
  std::pair<Eigen::VectorXd, Eigen::VectorXd> evaluate_pair(std::size_t pair_index,
                                                            const Eigen::MatrixXd& settings,
                                                            Rng& rng) override;

 private:
  void train_models(const Eigen::MatrixXd& settings);

  LabeledDataset train_;
  LabeledDataset pool_;
  std::size_t validation_size_;
  TrainingLoss loss_;
  Eigen::MatrixXd trained_for_;
  std::vector<Eigen::VectorXd> models_;
};

/// Fraction of correctly classified rows (sign(w.x) == y, ties count as +1).
double accuracy(const Eigen::VectorXd& w, const LabeledDataset& data);

/// p row pairs over s Sobol settings in [0, 1]^d.
EvalMatrices build_matrices(std::size_t pair_count, std::size_t setting_count,
                            EvaluationPipeline& pipeline, std::uint64_t seed);

struct LikelihoodCurve {
  std::vector<double> k1_values;
  std::vector<double> loglik;

  /// k1 with the largest log likelihood (first on ties).
  double argmax() const;
};

/// 0.05, 0.10, ..., 0.95.
std::vector<double> default_k1_grid();

inline constexpr double kLikelihoodJitter = 1e-6;

/// Joint log likelihood of all row pairs under the zero-mean multi-task GP
/// with covariance [[1, k1], [k1, 1]] (x) K2 + jitter I, for each k1.
LikelihoodCurve likelihood_curve(const EvalMatrices& mats, const KernelParams& k2,
                                 const std::vector<double>& k1_grid,
                                 double jitter = kLikelihoodJitter);

/// Same quantity for a single k1, exposed for checks against the direct
/// log-density evaluation.
double multitask_loglik(const EvalMatrices& mats, const KernelParams& k2, double k1,
                        double jitter = kLikelihoodJitter);

/// CSV with header `k1,loglik`.
void write_curve_csv(const LikelihoodCurve& curve, std::ostream& out);
/// CSV with header `pair,setting,f_v,f_vprime`.
void write_matrices_csv(const EvalMatrices& mats, std::ostream& out);

}  // namespace dpbo
