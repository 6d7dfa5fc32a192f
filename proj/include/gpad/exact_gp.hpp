#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "gpad/kernels.hpp"
#include "gpad/numerics.hpp"

namespace gpad {

// Predictive distribution for a single test input.  `variance` always
// includes the observation noise.
struct PredictiveDistribution {
  double mean = 0.0;
  double variance = 0.0;
};

// Generation sentinel meaning "no cached factorization can match".
inline constexpr std::uint64_t kNoGeneration = ~std::uint64_t{0};

// Gaussian process regression with exact inference: one Cholesky of the
// (N x N) noisy gram matrix per fit, O(N^3) time and O(N^2) memory.
//
// Parameter vector layout: [kernel log-parameters..., log noise_variance].
class ExactGp {
 public:
  ExactGp(KernelSpec kernel, double noise_variance)
      : kernel_(std::move(kernel)), noise_variance_(noise_variance) {
    validate_kernel(kernel_);
    if (!(noise_variance_ > 0.0) || !std::isfinite(noise_variance_)) {
      throw std::invalid_argument("noise variance must be positive");
    }
  }

  const KernelSpec& kernel() const { return kernel_; }
  double noise_variance() const { return noise_variance_; }

  Eigen::Index parameter_count() const {
    return kernel_parameter_count(kernel_) + 1;
  }

  Eigen::VectorXd parameters() const {
    Eigen::VectorXd u(parameter_count());
    u.head(u.size() - 1) = pack_kernel(kernel_);
    u[u.size() - 1] = std::log(noise_variance_);
    return u;
  }

  void set_parameters(const Eigen::VectorXd& u) {
    if (u.size() != parameter_count()) {
      throw std::invalid_argument("parameter vector size mismatch");
    }
    kernel_ = unpack_kernel(kernel_, u.head(u.size() - 1));
    noise_variance_ = std::exp(u[u.size() - 1]);
    cache_.valid = false;
  }

  // Log marginal likelihood of (x, y) under the current hyperparameters.
  double objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) const {
    check_data(x, y);
    Eigen::MatrixXd k = gram_matrix(kernel_, x, x);
    k.diagonal().array() += noise_variance_;
    const JitteredLlt fact = cholesky_with_jitter(k, "K + noise");
    const Eigen::VectorXd alpha = fact.llt.solve(y);
    return -0.5 * y.dot(alpha) - half_log_det(fact.llt) -
           0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
  }

  // Log marginal likelihood and its gradient with respect to the packed
  // log-space parameter vector.  dL/du_j = 1/2 tr[(aa' - K^-1) dK/du_j].
  std::pair<double, Eigen::VectorXd> objective_with_gradient(
      const Eigen::MatrixXd& x, const Eigen::VectorXd& y) const {
    check_data(x, y);
    const Eigen::Index n = y.size();
    GramGradients gg = gram_with_param_gradients(kernel_, x, x);
    gg.value.diagonal().array() += noise_variance_;
    const JitteredLlt fact = cholesky_with_jitter(gg.value, "K + noise");
    const Eigen::VectorXd alpha = fact.llt.solve(y);
    const double value = -0.5 * y.dot(alpha) - half_log_det(fact.llt) -
                         0.5 * static_cast<double>(n) *
                             std::log(2.0 * std::numbers::pi);

    const Eigen::MatrixXd k_inv =
        fact.llt.solve(Eigen::MatrixXd::Identity(n, n));
    const Eigen::MatrixXd outer =
        alpha * alpha.transpose() - k_inv;  // aa' - K^-1

    Eigen::VectorXd grad(parameter_count());
    for (std::size_t j = 0; j < gg.by_parameter.size(); ++j) {
      grad[static_cast<Eigen::Index>(j)] =
          0.5 * outer.cwiseProduct(gg.by_parameter[j]).sum();
    }
    // noise enters as sigma^2 I; chain through log: d/d log sigma^2 = sigma^2
    grad[grad.size() - 1] =
        0.5 * noise_variance_ * (alpha.squaredNorm() - k_inv.trace());
    return {value, grad};
  }

  // Factorizes the training covariance and stores it for fast prediction.
  // `generation` tags the fit so callers can tell whether the cache matches
  // the data they intend to predict against.
  void refit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
             std::uint64_t generation) {
    check_data(x, y);
    Eigen::MatrixXd k = gram_matrix(kernel_, x, x);
    k.diagonal().array() += noise_variance_;
    cache_.llt = cholesky_with_jitter(k, "K + noise").llt;
    cache_.x = x;
    cache_.alpha = cache_.llt.solve(y);
    cache_.generation = generation;
    cache_.valid = true;
  }

  bool has_cache(std::uint64_t generation) const {
    return cache_.valid && cache_.generation == generation;
  }

  // Predict from the cached fit.
  PredictiveDistribution predict(const Eigen::RowVectorXd& x_star) const {
    if (!cache_.valid) {
      throw std::logic_error("ExactGp::predict called before refit");
    }
    const Eigen::VectorXd k_star = gram_matrix(kernel_, cache_.x, x_star);
    const double mean = k_star.dot(cache_.alpha);
    const Eigen::VectorXd v = cache_.llt.matrixL().solve(k_star);
    const double prior = gram_diagonal(kernel_, x_star)[0];
    const double reduced = std::max(prior - v.squaredNorm(), 0.0);
    return {mean, reduced + noise_variance_};
  }

  // Predict against (x, y), reusing the cache when `generation` matches.
  PredictiveDistribution predict(const Eigen::MatrixXd& x,
                                 const Eigen::VectorXd& y,
                                 const Eigen::RowVectorXd& x_star,
                                 std::uint64_t generation = kNoGeneration) {
    if (!has_cache(generation)) {
      refit(x, y, generation);
    }
    return predict(x_star);
  }

 private:
  static void check_data(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.rows() != y.size()) {
      throw std::invalid_argument("inputs and targets differ in length");
    }
    if (x.rows() == 0) {
      throw std::invalid_argument("cannot fit a GP to an empty window");
    }
  }

  KernelSpec kernel_;
  double noise_variance_;

  struct Cache {
    bool valid = false;
    std::uint64_t generation = kNoGeneration;
    Eigen::MatrixXd x;
    Eigen::LLT<Eigen::MatrixXd> llt;
    Eigen::VectorXd alpha;
  };
  Cache cache_;
};

}  // namespace gpad
