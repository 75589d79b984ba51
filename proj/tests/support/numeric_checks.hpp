#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "persona/logistic.hpp"
#include "persona/random.hpp"

namespace persona::testing {

// Relative error between the analytic gradient and central differences with
// step h, as ||g - g_fd|| / max(||g|| + ||g_fd||, 1e-12).
template <typename Objective>
double gradient_rel_error(const Objective& obj, const Eigen::VectorXd& theta, double h = 1e-5) {
  Eigen::VectorXd g;
  obj.value_and_gradient(theta, g);
  Eigen::VectorXd fd(theta.size());
  Eigen::VectorXd t = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    t[i] = theta[i] + h;
    const double up = obj.value(t);
    t[i] = theta[i] - h;
    const double down = obj.value(t);
    t[i] = theta[i];
    fd[i] = (up - down) / (2.0 * h);
  }
  return (g - fd).norm() / std::max(g.norm() + fd.norm(), 1e-12);
}

inline Eigen::MatrixXd random_matrix(CounterRng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

inline Eigen::VectorXd random_vector(CounterRng& rng, Eigen::Index n, double sd = 1.0) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal(0.0, sd);
  return v;
}

inline bool non_increasing(const std::vector<double>& losses) {
  for (std::size_t i = 1; i < losses.size(); ++i) {
    if (losses[i] > losses[i - 1]) return false;
  }
  return true;
}

// Two Gaussian classes in `dim` dimensions with unit variance, means -1 and +1
// on the first axis and 0 elsewhere. Rows alternate low/high.
struct GaussianSet {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

inline GaussianSet gaussian_classes(std::uint64_t seed, std::size_t per_class, Eigen::Index dim = 16) {
  CounterRng rng(seed);
  GaussianSet s{Eigen::MatrixXd(static_cast<Eigen::Index>(2 * per_class), dim),
                Eigen::VectorXd(static_cast<Eigen::Index>(2 * per_class))};
  for (Eigen::Index i = 0; i < s.X.rows(); ++i) {
    const bool high = i % 2 == 1;
    for (Eigen::Index j = 0; j < dim; ++j) s.X(i, j) = rng.normal();
    s.X(i, 0) += high ? 1.0 : -1.0;
    s.y[i] = high ? 1.0 : 0.0;
  }
  return s;
}

}  // namespace persona::testing
