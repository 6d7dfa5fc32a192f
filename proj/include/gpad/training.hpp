#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gpad/numerics.hpp"

namespace gpad {

// First-order adaptive-moment ascent on a model's objective.  Works for any
// model exposing
//   parameters() / set_parameters(u)
//   objective(x, y)
//   objective_with_gradient(x, y)
// over an unconstrained parameter vector (positive hyperparameters enter in
// log space, inducing coordinates as-is).
struct OptimizerConfig {
  int initial_iterations = 1000;  // budget for the first fit of a window
  int warm_iterations = 10;       // budget when refining after a window update
  double step_size = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

enum class FitBudget { initial, warm };

struct FitResult {
  double initial_objective = std::numeric_limits<double>::quiet_NaN();
  double final_objective = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;           // parameter updates actually applied
  bool rolled_back = false;     // hit a non-finite objective or factorization
                                // failure and restored the best iterate
  std::vector<double> objective_trace;  // objective at every evaluated iterate
};

// Maximizes the model objective in place.  The model never ends worse than it
// started: the best evaluated iterate is restored at the end, including when
// the search walks into a region where the objective turns non-finite.
template <typename Model>
FitResult fit(Model& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
              const OptimizerConfig& config, FitBudget budget) {
  const int iterations = budget == FitBudget::initial
                             ? config.initial_iterations
                             : config.warm_iterations;
  if (iterations < 0) {
    throw std::invalid_argument("iteration budget must be non-negative");
  }

  FitResult result;
  if (iterations == 0) {
    const double value = model.objective(x, y);
    result.initial_objective = value;
    result.final_objective = value;
    result.objective_trace.push_back(value);
    return result;
  }

  Eigen::VectorXd u = model.parameters();
  Eigen::VectorXd best_u = u;
  double best_value = -std::numeric_limits<double>::infinity();

  // moment state starts fresh on every fit call
  Eigen::VectorXd m = Eigen::VectorXd::Zero(u.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(u.size());

  for (int t = 1; t <= iterations; ++t) {
    double value = std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXd grad;
    try {
      std::tie(value, grad) = model.objective_with_gradient(x, y);
    } catch (const NumericalError&) {
      result.rolled_back = true;
      break;
    }
    if (!std::isfinite(value) || !grad.allFinite()) {
      result.rolled_back = true;
      break;
    }
    result.objective_trace.push_back(value);
    if (t == 1) {
      result.initial_objective = value;
    }
    if (value > best_value) {
      best_value = value;
      best_u = u;
    }

    m = config.beta1 * m + (1.0 - config.beta1) * grad;
    v = config.beta2 * v + (1.0 - config.beta2) * grad.cwiseAbs2();
    const double m_corr = 1.0 - std::pow(config.beta1, t);
    const double v_corr = 1.0 - std::pow(config.beta2, t);
    u += config.step_size *
         ((m / m_corr).array() /
          ((v / v_corr).array().sqrt() + config.epsilon))
             .matrix();
    model.set_parameters(u);
    result.iterations = t;
  }

  // score the final iterate too, so a last productive step is not discarded
  if (!result.rolled_back) {
    double final_value = std::numeric_limits<double>::quiet_NaN();
    try {
      final_value = model.objective(x, y);
    } catch (const NumericalError&) {
      result.rolled_back = true;
    }
    if (std::isfinite(final_value)) {
      result.objective_trace.push_back(final_value);
      if (final_value > best_value) {
        best_value = final_value;
        best_u = u;
      }
    } else {
      result.rolled_back = true;
    }
  }

  model.set_parameters(best_u);
  if (std::isfinite(best_value)) {
    result.final_objective = best_value;
  }
  return result;
}

template <typename Model>
Eigen::VectorXd objective_gradient(const Model& model, const Eigen::MatrixXd& x,
                                   const Eigen::VectorXd& y) {
  return model.objective_with_gradient(x, y).second;
}

// Central-difference gradient through the same parameter interface; the
// reference implementation the analytic gradients are checked against.
template <typename Model>
Eigen::VectorXd objective_gradient_fd(const Model& model,
                                      const Eigen::MatrixXd& x,
                                      const Eigen::VectorXd& y,
                                      double relative_step = 1e-5) {
  Model work = model;
  const Eigen::VectorXd u = model.parameters();
  Eigen::VectorXd grad(u.size());
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    const double h = relative_step * std::max(1.0, std::abs(u[j]));
    Eigen::VectorXd up = u, um = u;
    up[j] += h;
    um[j] -= h;
    work.set_parameters(up);
    const double fp = work.objective(x, y);
    work.set_parameters(um);
    const double fm = work.objective(x, y);
    grad[j] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

// Data-driven starting hyperparameters: signal variance from the targets,
// lengthscale a tenth of the input range, noise a tenth of the variance.
struct ScaleDefaults {
  double variance = 1.0;
  double lengthscale = 1.0;
  double noise_variance = 0.1;
};

inline ScaleDefaults scale_defaults(const Eigen::MatrixXd& x,
                                    const Eigen::VectorXd& y) {
  ScaleDefaults defaults;
  if (y.size() >= 2) {
    const double mean = y.mean();
    const double var =
        (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1);
    if (var > 1e-12) {
      defaults.variance = var;
      defaults.noise_variance = 0.1 * var;
    }
  }
  if (x.rows() >= 2 && x.cols() >= 1) {
    const double range = x.col(0).maxCoeff() - x.col(0).minCoeff();
    if (range > 0.0) {
      defaults.lengthscale = range / 10.0;
    }
  }
  return defaults;
}

}  // namespace gpad
