#include "dpbo/convex_train.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace dpbo {

LabeledDataset::LabeledDataset(Eigen::MatrixXd features, Eigen::VectorXd labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
  if (features_.rows() != labels_.size()) {
    throw std::invalid_argument("dataset: feature rows and labels differ in count");
  }
  if (features_.rows() > 0 && features_.cols() < 1) {
    throw std::invalid_argument("dataset: need at least one feature column");
  }
  if (!features_.allFinite()) throw std::invalid_argument("dataset: non-finite feature");
  for (Eigen::Index i = 0; i < labels_.size(); ++i) {
    if (labels_(i) != 1.0 && labels_(i) != -1.0) {
      throw std::invalid_argument("dataset: label at row " + std::to_string(i) + " is not +1/-1");
    }
    const double norm = features_.row(i).norm();
    if (norm > 1.0) features_.row(i) /= norm;
  }
}

double LabeledDataset::max_feature_norm() const {
  if (size() == 0) return 0.0;
  return features_.rowwise().norm().maxCoeff();
}

LabeledDataset LabeledDataset::with_replaced(std::size_t index, const Eigen::VectorXd& x,
                                             double y) const {
  if (index >= size()) throw std::out_of_range("dataset: replacement index out of range");
  if (static_cast<std::size_t>(x.size()) != dimension()) {
    throw std::invalid_argument("dataset: replacement has wrong dimension");
  }
  Eigen::MatrixXd f = features_;
  Eigen::VectorXd l = labels_;
  f.row(static_cast<Eigen::Index>(index)) = x.transpose();
  l(static_cast<Eigen::Index>(index)) = y;
  return {std::move(f), std::move(l)};
}

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& rows) const {
  Eigen::MatrixXd f(static_cast<Eigen::Index>(rows.size()), features_.cols());
  Eigen::VectorXd l(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= size()) throw std::out_of_range("dataset: subset row out of range");
    f.row(static_cast<Eigen::Index>(k)) = features_.row(static_cast<Eigen::Index>(rows[k]));
    l(static_cast<Eigen::Index>(k)) = labels_(static_cast<Eigen::Index>(rows[k]));
  }
  return {std::move(f), std::move(l)};
}

std::string_view to_string(TrainingLoss loss) {
  switch (loss) {
    case TrainingLoss::Logistic: return "logistic";
    case TrainingLoss::HuberHinge: return "huber_hinge";
    case TrainingLoss::Hinge: return "hinge";
  }
  return "unknown";
}

std::string_view to_string(ValidationLoss loss) {
  return loss == ValidationLoss::Ramp ? "ramp" : "normalized_sigmoid";
}

TrainingLoss training_loss_from_string(std::string_view name) {
  if (name == "logistic") return TrainingLoss::Logistic;
  if (name == "huber_hinge") return TrainingLoss::HuberHinge;
  if (name == "hinge") return TrainingLoss::Hinge;
  throw std::invalid_argument("unknown training loss '" + std::string(name) + "'");
}

ValidationLoss validation_loss_from_string(std::string_view name) {
  if (name == "ramp") return ValidationLoss::Ramp;
  if (name == "normalized_sigmoid" || name == "sigmoid") return ValidationLoss::NormalizedSigmoid;
  throw std::invalid_argument("unknown validation loss '" + std::string(name) + "'");
}

namespace {

struct LossTerms {
  double value;
  double slope;      // d loss / d margin
  double curvature;  // d^2 loss / d margin^2
};

LossTerms loss_terms(TrainingLoss loss, double z, double huber_width) {
  switch (loss) {
    case TrainingLoss::Logistic: {
      // log(1 + e^{-z}) evaluated without overflow on either side.
      const double value = z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
      const double s = 1.0 / (1.0 + std::exp(z));  // sigma(-z)
      return {value, -s, s * (1.0 - s)};
    }
    case TrainingLoss::HuberHinge: {
      const double h = huber_width;
      if (z >= 1.0) return {0.0, 0.0, 0.0};
      if (z <= 1.0 - h) return {1.0 - z - 0.5 * h, -1.0, 0.0};
      const double gap = 1.0 - z;
      return {gap * gap / (2.0 * h), -gap / h, 1.0 / h};
    }
    case TrainingLoss::Hinge:
      if (z >= 1.0) return {0.0, 0.0, 0.0};
      return {1.0 - z, -1.0, 0.0};
  }
  throw std::logic_error("unhandled training loss");
}

void check_train_inputs(const LabeledDataset& data, const Eigen::VectorXd& w, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("training: lambda must be > 0");
  if (data.size() == 0) throw std::invalid_argument("training: empty dataset");
  if (static_cast<std::size_t>(w.size()) != data.dimension()) {
    throw std::invalid_argument("training: weight dimension mismatch");
  }
}

}  // namespace

double erm_objective(const LabeledDataset& data, const Eigen::VectorXd& w, double lambda,
                     TrainingLoss loss, const TrainOptions& options) {
  check_train_inputs(data, w, lambda);
  const Eigen::VectorXd margins = data.labels().cwiseProduct(data.features() * w);
  double total = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) {
    total += loss_terms(loss, margins(i), options.huber_width).value;
  }
  return 0.5 * lambda * w.squaredNorm() + total / static_cast<double>(data.size());
}

Eigen::VectorXd erm_gradient(const LabeledDataset& data, const Eigen::VectorXd& w, double lambda,
                             TrainingLoss loss, const TrainOptions& options) {
  check_train_inputs(data, w, lambda);
  const Eigen::VectorXd margins = data.labels().cwiseProduct(data.features() * w);
  Eigen::VectorXd coeff(margins.size());
  for (Eigen::Index i = 0; i < margins.size(); ++i) {
    coeff(i) = loss_terms(loss, margins(i), options.huber_width).slope * data.labels()(i);
  }
  return lambda * w + data.features().transpose() * coeff / static_cast<double>(data.size());
}

namespace {

ModelWeights train_subgradient_hinge(const LabeledDataset& data, double lambda,
                                     const TrainOptions& options) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.dimension()));
  Eigen::VectorXd best = w;
  double best_obj = erm_objective(data, w, lambda, TrainingLoss::Hinge, options);
  for (std::size_t t = 1; t <= options.hinge_iterations; ++t) {
    const Eigen::VectorXd g = erm_gradient(data, w, lambda, TrainingLoss::Hinge, options);
    w -= g / (lambda * static_cast<double>(t));
    // The minimizer lies in the ball of radius 1/lambda.
    const double norm = w.norm();
    if (norm > 1.0 / lambda) w *= (1.0 / lambda) / norm;
    const double obj = erm_objective(data, w, lambda, TrainingLoss::Hinge, options);
    if (obj < best_obj) {
      best_obj = obj;
      best = w;
    }
  }
  return {best, lambda};
}

}  // namespace

ModelWeights train_erm(const LabeledDataset& data, double lambda, TrainingLoss loss,
                       const TrainOptions& options) {
  if (!(lambda > 0.0)) throw std::invalid_argument("train_erm: lambda must be > 0");
  if (data.size() == 0) throw std::invalid_argument("train_erm: empty dataset");
  if (loss == TrainingLoss::Hinge) return train_subgradient_hinge(data, lambda, options);

  const auto d = static_cast<Eigen::Index>(data.dimension());
  const auto n = static_cast<double>(data.size());
  const Eigen::MatrixXd& x = data.features();
  const Eigen::VectorXd& y = data.labels();

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double obj = erm_objective(data, w, lambda, loss, options);
  double grad_norm = 0.0;
  for (std::size_t iter = 0; iter < options.max_newton_iterations; ++iter) {
    const Eigen::VectorXd margins = y.cwiseProduct(x * w);
    Eigen::VectorXd coeff(margins.size());
    Eigen::VectorXd curv(margins.size());
    for (Eigen::Index i = 0; i < margins.size(); ++i) {
      const auto terms = loss_terms(loss, margins(i), options.huber_width);
      coeff(i) = terms.slope * y(i);
      curv(i) = terms.curvature;
    }
    const Eigen::VectorXd grad = lambda * w + x.transpose() * coeff / n;
    grad_norm = grad.norm();
    if (grad_norm <= options.gradient_tolerance) return {w, lambda};

    Eigen::MatrixXd hess = x.transpose() * curv.asDiagonal() * x / n;
    hess.diagonal().array() += lambda;
    Eigen::VectorXd step = -hess.llt().solve(grad);

    // Armijo backtracking; the Newton direction is a descent direction since
    // the Hessian is at least lambda I.
    double t = 1.0;
    const double slope = grad.dot(step);
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      const Eigen::VectorXd candidate = w + t * step;
      const double cand_obj = erm_objective(data, candidate, lambda, loss, options);
      if (cand_obj <= obj + 1e-4 * t * slope) {
        w = candidate;
        obj = cand_obj;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // Objective is flat to rounding along the Newton direction; take the
      // full step if it does not increase the gradient norm.
      const Eigen::VectorXd candidate = w + step;
      if (erm_gradient(data, candidate, lambda, loss, options).norm() < grad_norm) {
        w = candidate;
        obj = erm_objective(data, w, lambda, loss, options);
      } else {
        break;
      }
    }
  }
  grad_norm = erm_gradient(data, w, lambda, loss, options).norm();
  if (grad_norm <= options.gradient_tolerance) return {w, lambda};
  std::ostringstream msg;
  msg << "train_erm did not converge: final gradient norm " << grad_norm;
  throw ConvergenceError(msg.str(), grad_norm);
}

double validation_loss(ValidationLoss loss, double margin) {
  switch (loss) {
    case ValidationLoss::Ramp:
      return std::clamp(1.0 - margin, 0.0, 1.0);
    case ValidationLoss::NormalizedSigmoid:
      return 1.0 / (1.0 + std::exp(margin));
  }
  throw std::logic_error("unhandled validation loss");
}

double validation_score(const Eigen::VectorXd& w, const LabeledDataset& val, ValidationLoss loss) {
  if (val.size() == 0) throw std::invalid_argument("validation_score: empty validation set");
  if (static_cast<std::size_t>(w.size()) != val.dimension()) {
    throw std::invalid_argument("validation_score: weight dimension mismatch");
  }
  const Eigen::VectorXd margins = val.labels().cwiseProduct(val.features() * w);
  double total = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) total += validation_loss(loss, margins(i));
  return -total / static_cast<double>(val.size());
}

double validation_score(const ModelWeights& w, const LabeledDataset& val, ValidationLoss loss) {
  return validation_score(w.w, val, loss);
}

double validation_lipschitz(ValidationLoss loss, const LabeledDataset& val) {
  return loss == ValidationLoss::Ramp ? val.max_feature_norm() : 0.25;
}

double validation_loss_bound(ValidationLoss) { return 1.0; }

double stability_bound(double lambda, double lambda_prime, double lipschitz, double g_star,
                       std::size_t m, double lambda_min) {
  if (!(lambda > 0.0) || !(lambda_prime > 0.0)) {
    throw std::invalid_argument("stability_bound: regularization values must be > 0");
  }
  if (!(lambda_min > 0.0)) throw std::invalid_argument("stability_bound: lambda_min must be > 0");
  if (m < 1) throw std::invalid_argument("stability_bound: validation size must be >= 1");
  if (!(lipschitz >= 0.0) || !(g_star >= 0.0)) {
    throw std::invalid_argument("stability_bound: L and g* must be >= 0");
  }
  const double lo = std::min(lambda, lambda_prime);
  const double hi = std::max(lambda, lambda_prime);
  const double md = static_cast<double>(m);
  return (hi - lo) * lipschitz / (hi * lo) + std::min(g_star / md, lipschitz / (md * lambda_min));
}

}  // namespace dpbo
