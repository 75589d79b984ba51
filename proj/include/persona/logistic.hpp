#pragma once

// Regularized logistic and softmax regression objectives, templated on the
// scalar type, plus the full-batch gradient-descent driver both models share.
//
// Parameters are packed into one vector so the optimizer and the
// finite-difference tests can treat every objective alike:
//   binary:  theta = [w_0 .. w_{d-1}, b]
//   softmax: theta = [vec(W) (column-major, K x d), b_0 .. b_{K-1}]
// The bias terms are never penalized.

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "persona/error.hpp"

namespace persona {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// 1 / (1 + e^-z) without overflow for any finite z. Negative arguments are
// mapped through 1 - sigmoid(-z); since sigmoid(-z) lies in [0.5, 1] the
// subtraction is exact, so sigmoid(-z) == 1 - sigmoid(z) holds bit for bit.
template <typename Scalar>
Scalar sigmoid(Scalar z) {
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  return Scalar(1) - Scalar(1) / (Scalar(1) + std::exp(z));
}

// log(1 + e^z)
template <typename Scalar>
Scalar softplus(Scalar z) {
  return z > Scalar(0) ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = z.maxCoeff();
  return m + std::log((z.array() - m).exp().sum());
}

// Softmax of a logit vector; entries sum to 1 up to rounding.
template <typename Derived>
VectorX<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = z.maxCoeff();
  VectorX<Scalar> e = (z.array() - m).exp().matrix();
  return e / e.sum();
}

// Mean negative log-likelihood of y in {0,1} under sigmoid(X w + b), plus
// (lambda / 2) ||w||^2. X is n x d.
template <typename Scalar>
class BinaryLogisticObjective {
 public:
  BinaryLogisticObjective(const MatrixX<Scalar>& X, const VectorX<Scalar>& y, Scalar lambda)
      : X_(X), y_(y), lambda_(lambda) {}

  Eigen::Index num_params() const { return X_.cols() + 1; }

  Scalar value(const VectorX<Scalar>& theta) const {
    const Eigen::Index d = X_.cols();
    const VectorX<Scalar> z = (X_ * theta.head(d)).array() + theta[d];
    Scalar nll(0);
    for (Eigen::Index i = 0; i < z.size(); ++i) nll += softplus(z[i]) - y_[i] * z[i];
    return nll / static_cast<Scalar>(X_.rows()) +
           Scalar(0.5) * lambda_ * theta.head(d).squaredNorm();
  }

  Scalar value_and_gradient(const VectorX<Scalar>& theta, VectorX<Scalar>& grad) const {
    const Eigen::Index d = X_.cols();
    const Scalar n = static_cast<Scalar>(X_.rows());
    const VectorX<Scalar> z = (X_ * theta.head(d)).array() + theta[d];
    VectorX<Scalar> residual(z.size());
    Scalar nll(0);
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      nll += softplus(z[i]) - y_[i] * z[i];
      residual[i] = sigmoid(z[i]) - y_[i];
    }
    grad.resize(d + 1);
    grad.head(d) = X_.transpose() * residual / n + lambda_ * theta.head(d);
    grad[d] = residual.sum() / n;
    return nll / n + Scalar(0.5) * lambda_ * theta.head(d).squaredNorm();
  }

 private:
  const MatrixX<Scalar>& X_;
  const VectorX<Scalar>& y_;
  Scalar lambda_;
};

// Mean cross-entropy of integer labels in [0, K) under softmax(W x + b), plus
// (lambda / 2) ||W||_F^2.
template <typename Scalar>
class SoftmaxObjective {
 public:
  SoftmaxObjective(const MatrixX<Scalar>& X, const std::vector<int>& labels, Eigen::Index classes,
                   Scalar lambda)
      : X_(X), labels_(labels), classes_(classes), lambda_(lambda) {}

  Eigen::Index num_params() const { return classes_ * (X_.cols() + 1); }
  Eigen::Index classes() const { return classes_; }

  static MatrixX<Scalar> weights(const VectorX<Scalar>& theta, Eigen::Index classes, Eigen::Index d) {
    return Eigen::Map<const MatrixX<Scalar>>(theta.data(), classes, d);
  }
  static VectorX<Scalar> biases(const VectorX<Scalar>& theta, Eigen::Index classes, Eigen::Index d) {
    return theta.segment(classes * d, classes);
  }

  Scalar value(const VectorX<Scalar>& theta) const {
    return evaluate(theta, nullptr);
  }

  Scalar value_and_gradient(const VectorX<Scalar>& theta, VectorX<Scalar>& grad) const {
    grad.resize(num_params());
    return evaluate(theta, &grad);
  }

 private:
  Scalar evaluate(const VectorX<Scalar>& theta, VectorX<Scalar>* grad) const {
    const Eigen::Index d = X_.cols();
    const Scalar n = static_cast<Scalar>(X_.rows());
    const MatrixX<Scalar> W = weights(theta, classes_, d);
    const VectorX<Scalar> b = biases(theta, classes_, d);
    const MatrixX<Scalar> logits = (X_ * W.transpose()).rowwise() + b.transpose();  // n x K

    Scalar ce(0);
    MatrixX<Scalar> residual(X_.rows(), classes_);  // P - Y
    for (Eigen::Index i = 0; i < X_.rows(); ++i) {
      const VectorX<Scalar> zi = logits.row(i).transpose();
      ce += log_sum_exp(zi) - zi[labels_[static_cast<std::size_t>(i)]];
      if (grad) {
        residual.row(i) = softmax(zi).transpose();
        residual(i, labels_[static_cast<std::size_t>(i)]) -= Scalar(1);
      }
    }
    if (grad) {
      const MatrixX<Scalar> gW = residual.transpose() * X_ / n + lambda_ * W;
      grad->head(classes_ * d) = Eigen::Map<const VectorX<Scalar>>(gW.data(), classes_ * d);
      grad->segment(classes_ * d, classes_) = residual.colwise().sum().transpose() / n;
    }
    return ce / n + Scalar(0.5) * lambda_ * W.squaredNorm();
  }

  const MatrixX<Scalar>& X_;
  const std::vector<int>& labels_;
  Eigen::Index classes_;
  Scalar lambda_;
};

template <typename Scalar>
struct DescentOptions {
  Scalar learning_rate = Scalar(0.1);
  int max_iters = 2000;
  Scalar tol = Scalar(1e-7);  // on the gradient max-norm
  int max_halvings = 30;
};

template <typename Scalar>
struct DescentTrace {
  std::vector<Scalar> losses;  // initial loss, then one entry per accepted step
  int iterations = 0;          // accepted steps
  int halvings = 0;
  bool converged = false;      // gradient max-norm fell below tol
  bool stalled = false;        // no step within max_halvings lowered the loss
  Scalar final_grad_norm = Scalar(0);
};

// Full-batch gradient descent from the given theta. Each iteration tries the
// base learning rate and halves it while the loss would increase; a step is
// accepted only if the loss does not go up, so trace.losses is non-increasing.
template <typename Objective, typename Scalar>
DescentTrace<Scalar> gradient_descent(const Objective& objective, VectorX<Scalar>& theta,
                                      const DescentOptions<Scalar>& opts) {
  DescentTrace<Scalar> trace;
  VectorX<Scalar> grad;
  Scalar loss = objective.value_and_gradient(theta, grad);
  if (!std::isfinite(loss)) throw DataError("non-finite loss at iteration 0");
  trace.losses.push_back(loss);

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    trace.final_grad_norm = grad.cwiseAbs().maxCoeff();
    if (trace.final_grad_norm < opts.tol) {
      trace.converged = true;
      return trace;
    }
    Scalar step = opts.learning_rate;
    bool accepted = false;
    for (int h = 0; h <= opts.max_halvings; ++h, step /= Scalar(2)) {
      VectorX<Scalar> candidate = theta - step * grad;
      const Scalar next = objective.value(candidate);
      if (std::isfinite(next) && next <= loss) {
        theta = std::move(candidate);
        accepted = true;
        break;
      }
      ++trace.halvings;
    }
    if (!accepted) {
      trace.stalled = true;
      return trace;
    }
    loss = objective.value_and_gradient(theta, grad);
    if (!std::isfinite(loss)) {
      throw DataError("non-finite loss at iteration " + std::to_string(iter + 1));
    }
    trace.losses.push_back(loss);
    ++trace.iterations;
  }
  trace.final_grad_norm = grad.cwiseAbs().maxCoeff();
  trace.converged = trace.final_grad_norm < opts.tol;
  return trace;
}

// Per-feature z-scoring fitted on training rows. Features with zero spread get
// a unit scale so stds stay strictly positive. Disabled scaling is the
// identity (means 0, stds 1).
template <typename Scalar>
struct FeatureScaler {
  VectorX<Scalar> means;
  VectorX<Scalar> stds;

  static FeatureScaler identity(Eigen::Index d) {
    return {VectorX<Scalar>::Zero(d), VectorX<Scalar>::Ones(d)};
  }

  static FeatureScaler fit(const MatrixX<Scalar>& X, bool enabled) {
    if (!enabled || X.rows() == 0) return identity(X.cols());
    FeatureScaler s;
    s.means = X.colwise().mean().transpose();
    s.stds.resize(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const Scalar var = (X.col(j).array() - s.means[j]).square().mean();
      const Scalar sd = std::sqrt(var);
      s.stds[j] = sd > Scalar(0) && std::isfinite(sd) ? sd : Scalar(1);
    }
    return s;
  }

  MatrixX<Scalar> transform(const MatrixX<Scalar>& X) const {
    return ((X.rowwise() - means.transpose()).array().rowwise() / stds.transpose().array()).matrix();
  }

  template <typename Derived>
  VectorX<Scalar> transform(const Eigen::MatrixBase<Derived>& x) const {
    return ((x.array() - means.array()) / stds.array()).matrix();
  }
};

}  // namespace persona
