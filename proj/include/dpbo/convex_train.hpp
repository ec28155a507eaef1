#pragma once

#include "dpbo/common.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string_view>
#include <vector>

namespace dpbo {

/// Binary-labelled examples. Each feature row is projected onto the unit
/// ball on construction so 1-Lipschitz training losses stay 1-Lipschitz in w.
class LabeledDataset {
 public:
  /// `features` is n x d (one example per row); labels must be +1 or -1.
  LabeledDataset(Eigen::MatrixXd features, Eigen::VectorXd labels);

  std::size_t size() const noexcept { return static_cast<std::size_t>(labels_.size()); }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(features_.cols()); }
  const Eigen::MatrixXd& features() const noexcept { return features_; }
  const Eigen::VectorXd& labels() const noexcept { return labels_; }
  double max_feature_norm() const;

  /// Neighbouring dataset: record `index` swapped for (x, y).
  LabeledDataset with_replaced(std::size_t index, const Eigen::VectorXd& x, double y) const;
  LabeledDataset subset(const std::vector<std::size_t>& rows) const;

 private:
  Eigen::MatrixXd features_;
  Eigen::VectorXd labels_;
};

enum class TrainingLoss { Logistic, HuberHinge, Hinge };
enum class ValidationLoss { Ramp, NormalizedSigmoid };

std::string_view to_string(TrainingLoss loss);
std::string_view to_string(ValidationLoss loss);
TrainingLoss training_loss_from_string(std::string_view name);
ValidationLoss validation_loss_from_string(std::string_view name);

struct ModelWeights {
  Eigen::VectorXd w;
  double lambda = 0.0;
};

struct TrainOptions {
  double gradient_tolerance = 1e-8;
  std::size_t max_newton_iterations = 200;
  /// Quadratic smoothing band of the Huberized hinge.
  double huber_width = 1e-3;
  /// Iterations of the subgradient method used for the exact hinge.
  std::size_t hinge_iterations = 20000;
};

/// (lambda/2)||w||^2 + mean loss, and its gradient.
double erm_objective(const LabeledDataset& data, const Eigen::VectorXd& w, double lambda,
                     TrainingLoss loss, const TrainOptions& options = {});
Eigen::VectorXd erm_gradient(const LabeledDataset& data, const Eigen::VectorXd& w, double lambda,
                             TrainingLoss loss, const TrainOptions& options = {});

/// Unique minimizer of the lambda-strongly convex regularized risk.
/// Smooth losses use damped Newton until ||grad|| <= tolerance and throw
/// ConvergenceError otherwise; the exact hinge runs a fixed subgradient budget.
ModelWeights train_erm(const LabeledDataset& data, double lambda, TrainingLoss loss,
                       const TrainOptions& options = {});

/// Per-example validation loss g(w, x, y).
double validation_loss(ValidationLoss loss, double margin);

/// f_V(w) = -(1/m) sum_i g(w, x_i, y_i).
double validation_score(const ModelWeights& w, const LabeledDataset& val, ValidationLoss loss);
double validation_score(const Eigen::VectorXd& w, const LabeledDataset& val, ValidationLoss loss);

/// Lipschitz constant of the validation loss in w: max feature norm for the
/// ramp, 1/4 for the normalized sigmoid.
double validation_lipschitz(ValidationLoss loss, const LabeledDataset& val);
/// sup of the validation loss, g*. Both offered losses are bounded by 1.
double validation_loss_bound(ValidationLoss loss);

/// Bound on |f_V(w_lambda) - f_V'(w_lambda')| for neighbouring validation sets:
/// (hi - lo) L / (hi lo) + min{g*/m, L/(m lambda_min)}. Argument order of the
/// two regularization values does not matter.
double stability_bound(double lambda, double lambda_prime, double lipschitz, double g_star,
                       std::size_t m, double lambda_min);

}  // namespace dpbo
