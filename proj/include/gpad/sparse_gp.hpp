#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "gpad/kernels.hpp"
#include "gpad/exact_gp.hpp"
#include "gpad/numerics.hpp"

namespace gpad {

// Variationally-sparse Gaussian process regression with M inducing inputs.
// The collapsed variational bound on the log marginal likelihood is
//
//   L = log N(y | 0, sigma^2 I + K_nm K_mm^-1 K_mn)
//       - 1/(2 sigma^2) * tr(K_nn - K_nm K_mm^-1 K_mn)
//
// and both the bound and its gradient cost O(N M^2): only M x M matrices are
// ever factorized.  Inducing inputs are free parameters, optimized jointly
// with the kernel hyperparameters.
//
// Parameter vector layout:
//   [kernel log-parameters..., log noise_variance, Z(0,:), Z(1,:), ...]
// with inducing coordinates unconstrained (not log-transformed).
class SparseGp {
 public:
  SparseGp(KernelSpec kernel, double noise_variance, Eigen::MatrixXd inducing)
      : kernel_(std::move(kernel)),
        noise_variance_(noise_variance),
        z_(std::move(inducing)) {
    validate_kernel(kernel_);
    if (!(noise_variance_ > 0.0) || !std::isfinite(noise_variance_)) {
      throw std::invalid_argument("noise variance must be positive");
    }
    if (z_.rows() == 0 || z_.cols() == 0) {
      throw std::invalid_argument("need at least one inducing input");
    }
  }

  const KernelSpec& kernel() const { return kernel_; }
  double noise_variance() const { return noise_variance_; }
  const Eigen::MatrixXd& inducing() const { return z_; }

  Eigen::Index parameter_count() const {
    return kernel_parameter_count(kernel_) + 1 + z_.size();
  }

  Eigen::VectorXd parameters() const {
    const Eigen::Index p = kernel_parameter_count(kernel_);
    Eigen::VectorXd u(parameter_count());
    u.head(p) = pack_kernel(kernel_);
    u[p] = std::log(noise_variance_);
    Eigen::Index at = p + 1;
    for (Eigen::Index m = 0; m < z_.rows(); ++m) {
      for (Eigen::Index d = 0; d < z_.cols(); ++d) {
        u[at++] = z_(m, d);
      }
    }
    return u;
  }

  void set_parameters(const Eigen::VectorXd& u) {
    if (u.size() != parameter_count()) {
      throw std::invalid_argument("parameter vector size mismatch");
    }
    const Eigen::Index p = kernel_parameter_count(kernel_);
    kernel_ = unpack_kernel(kernel_, u.head(p));
    noise_variance_ = std::exp(u[p]);
    Eigen::Index at = p + 1;
    for (Eigen::Index m = 0; m < z_.rows(); ++m) {
      for (Eigen::Index d = 0; d < z_.cols(); ++d) {
        z_(m, d) = u[at++];
      }
    }
    cache_.valid = false;
  }

  // Evidence lower bound for (x, y) under the current parameters.
  double objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) const {
    check_data(x, y);
    const Eigen::MatrixXd a = gram_matrix(kernel_, x, z_);
    const Eigen::MatrixXd kmm = gram_matrix(kernel_, z_, z_);
    const Eigen::VectorXd kdiag = gram_diagonal(kernel_, x);
    return core(a, kmm, kdiag, y).value;
  }

  // Bound and gradient with respect to the packed parameter vector.
  std::pair<double, Eigen::VectorXd> objective_with_gradient(
      const Eigen::MatrixXd& x, const Eigen::VectorXd& y) const {
    check_data(x, y);
    const Eigen::Index n = y.size();
    const Eigen::Index m = z_.rows();
    const double inv_s2 = 1.0 / noise_variance_;

    GramGradients ga = gram_with_param_gradients(kernel_, x, z_);
    GramGradients gm = gram_with_param_gradients(kernel_, z_, z_);
    DiagGradients gd = diagonal_with_param_gradients(kernel_, x);
    const Eigen::MatrixXd& a = ga.value;

    const Core f = core(a, gm.value, gd.value, y);

    // Adjoint of L1 = log N(y | 0, G) with respect to G is
    // S = (P P' - G^-1) / 2 with P = G^-1 y; everything below stays N x M.
    const Eigen::VectorXd p_vec =
        inv_s2 * (y - inv_s2 * (a * f.sig_c));            // G^-1 y
    const Eigen::MatrixXd sig_cmat = f.lsig.llt.solve(f.c_mat);  // Sigma A'A
    const Eigen::MatrixXd ginv_a = inv_s2 * (a - inv_s2 * (a * sig_cmat));
    const Eigen::RowVectorXd pta = p_vec.transpose() * a;
    const Eigen::MatrixXd sa = 0.5 * (p_vec * pta - ginv_a);  // S A

    const Eigen::MatrixXd adj_a_l1 = 2.0 * sa * f.kmm_inv;
    Eigen::MatrixXd adj_mm =
        -f.kmm_inv * (a.transpose() * sa) * f.kmm_inv;    // dL1 / dK_mm

    const double tr_ginv =
        inv_s2 * (static_cast<double>(n) - inv_s2 * sig_cmat.trace());
    const double dl1_ds2 = 0.5 * (p_vec.squaredNorm() - tr_ginv);

    // Trace-correction part L2 = -1/(2 sigma^2) (sum kdiag - tr(K_mm^-1 A'A))
    const Eigen::MatrixXd a_kmm_inv = a * f.kmm_inv;
    const Eigen::MatrixXd adj_a = adj_a_l1 + inv_s2 * a_kmm_inv;
    adj_mm -= 0.5 * inv_s2 * (f.kmm_inv * f.c_mat * f.kmm_inv);
    adj_mm = 0.5 * (adj_mm + adj_mm.transpose()).eval();  // keep exactly symmetric
    const double adj_diag = -0.5 * inv_s2;
    const double dl2_ds2 = 0.5 * inv_s2 * inv_s2 * f.trace_term;

    Eigen::VectorXd grad(parameter_count());
    const Eigen::Index p = kernel_parameter_count(kernel_);
    for (Eigen::Index j = 0; j < p; ++j) {
      grad[j] = adj_a.cwiseProduct(ga.by_parameter[j]).sum() +
                adj_mm.cwiseProduct(gm.by_parameter[j]).sum() +
                adj_diag * gd.by_parameter[j].sum();
    }
    grad[p] = noise_variance_ * (dl1_ds2 + dl2_ds2);

    // Inducing coordinates: column m of A and row/column m of K_mm move.
    const std::vector<Eigen::MatrixXd> da_dz =
        gram_second_arg_gradients(kernel_, x, z_);
    const std::vector<Eigen::MatrixXd> dmm_dz =
        gram_second_arg_gradients(kernel_, z_, z_);
    Eigen::Index at = p + 1;
    for (Eigen::Index mm = 0; mm < m; ++mm) {
      for (Eigen::Index d = 0; d < z_.cols(); ++d) {
        grad[at++] = adj_a.col(mm).dot(da_dz[d].col(mm)) +
                     2.0 * adj_mm.col(mm).dot(dmm_dz[d].col(mm));
      }
    }
    return {f.value, grad};
  }

  // Factorizes the current posterior for fast prediction (O(N M^2)).
  void refit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
             std::uint64_t generation) {
    check_data(x, y);
    const Eigen::MatrixXd a = gram_matrix(kernel_, x, z_);
    const Eigen::MatrixXd kmm = gram_matrix(kernel_, z_, z_);
    const Eigen::VectorXd kdiag = gram_diagonal(kernel_, x);
    Core f = core(a, kmm, kdiag, y);
    cache_.lmm = std::move(f.lmm.llt);
    cache_.lsig = std::move(f.lsig.llt);
    cache_.w = (1.0 / noise_variance_) * f.sig_c;
    cache_.generation = generation;
    cache_.valid = true;
  }

  bool has_cache(std::uint64_t generation) const {
    return cache_.valid && cache_.generation == generation;
  }

  // Predictive distribution at one input, observation noise included:
  //   mean = k*' w,  var = k** - |Lmm^-1 k*|^2 + |Lsig^-1 k*|^2 + sigma^2.
  PredictiveDistribution predict(const Eigen::RowVectorXd& x_star) const {
    if (!cache_.valid) {
      throw std::logic_error("SparseGp::predict called before refit");
    }
    const Eigen::VectorXd k_star = gram_matrix(kernel_, z_, x_star);
    const double mean = k_star.dot(cache_.w);
    const Eigen::VectorXd va = cache_.lmm.matrixL().solve(k_star);
    const Eigen::VectorXd vb = cache_.lsig.matrixL().solve(k_star);
    const double prior = gram_diagonal(kernel_, x_star)[0];
    const double reduced =
        std::max(prior - va.squaredNorm() + vb.squaredNorm(), 0.0);
    return {mean, reduced + noise_variance_};
  }

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
  struct Core {
    JitteredLlt lmm;
    JitteredLlt lsig;
    Eigen::MatrixXd c_mat;    // A' A
    Eigen::VectorXd sig_c;    // Sigma A' y
    Eigen::MatrixXd kmm_inv;
    double trace_term = 0.0;  // sum kdiag - tr(K_mm^-1 A' A)
    double value = 0.0;       // the bound itself
  };

  // Shared factorization work behind objective / gradient / refit.
  Core core(const Eigen::MatrixXd& a, const Eigen::MatrixXd& kmm,
            const Eigen::VectorXd& kdiag, const Eigen::VectorXd& y) const {
    const Eigen::Index n = y.size();
    const Eigen::Index m = kmm.rows();
    const double inv_s2 = 1.0 / noise_variance_;

    Core f;
    f.lmm = cholesky_with_jitter(kmm, "K_mm");
    f.c_mat.noalias() = a.transpose() * a;
    const Eigen::VectorXd c_vec = a.transpose() * y;

    // Sigma^-1 = K_mm + sigma^-2 A'A; |G| and quadratic form follow from the
    // determinant lemma / Woodbury identity so nothing N x N is formed.
    // The *same* jittered K_mm must appear on both sides of the identity,
    // otherwise near-null directions of K_mm get inflated inconsistently and
    // the bound loses several digits.  Sigma^-1 is PD by construction, so it
    // normally factorizes without help; extra jitter is a fallback only.
    Eigen::MatrixXd sig_inv = kmm + inv_s2 * f.c_mat;
    sig_inv.diagonal().array() += f.lmm.jitter;
    f.lsig.jitter = f.lmm.jitter;
    f.lsig.llt.compute(sig_inv);
    if (f.lsig.llt.info() != Eigen::Success) {
      f.lsig = cholesky_with_jitter(sig_inv, "K_mm + noise^-1 A'A");
    }
    f.sig_c = f.lsig.llt.solve(c_vec);

    const double quad = inv_s2 * (y.squaredNorm() - inv_s2 * c_vec.dot(f.sig_c));
    const double log_det_g = static_cast<double>(n) * std::log(noise_variance_) +
                             2.0 * half_log_det(f.lsig.llt) -
                             2.0 * half_log_det(f.lmm.llt);

    f.kmm_inv = f.lmm.llt.solve(Eigen::MatrixXd::Identity(m, m));
    const double tr_kc = f.kmm_inv.cwiseProduct(f.c_mat).sum();
    f.trace_term = kdiag.sum() - tr_kc;

    f.value = -0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi) -
              0.5 * log_det_g - 0.5 * quad - 0.5 * inv_s2 * f.trace_term;
    return f;
  }

  void check_data(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) const {
    if (x.rows() != y.size()) {
      throw std::invalid_argument("inputs and targets differ in length");
    }
    if (x.rows() == 0) {
      throw std::invalid_argument("cannot fit a GP to an empty window");
    }
    if (x.cols() != z_.cols()) {
      throw std::invalid_argument("data and inducing inputs differ in dimension");
    }
  }

  KernelSpec kernel_;
  double noise_variance_;
  Eigen::MatrixXd z_;  // M x D inducing inputs

  struct Cache {
    bool valid = false;
    std::uint64_t generation = kNoGeneration;
    Eigen::LLT<Eigen::MatrixXd> lmm;
    Eigen::LLT<Eigen::MatrixXd> lsig;
    Eigen::VectorXd w;
  };
  Cache cache_;
};

// Deterministic inducing-input initialization: M points evenly spaced over
// the data range in every dimension (the endpoints included).  A single
// point lands at the range midpoint; a collapsed range is spread by tiny
// offsets so the inducing set stays distinct.  `seed` is accepted for
// interface stability but unused — the placement is deterministic.
inline Eigen::MatrixXd init_inducing(const Eigen::MatrixXd& x, Eigen::Index m,
                                     std::uint64_t /*seed*/ = 0) {
  if (m < 1) {
    throw std::invalid_argument("need at least one inducing input");
  }
  if (x.rows() == 0) {
    throw std::invalid_argument("cannot place inducing inputs without data");
  }
  Eigen::MatrixXd z(m, x.cols());
  for (Eigen::Index d = 0; d < x.cols(); ++d) {
    const double lo = x.col(d).minCoeff();
    const double hi = x.col(d).maxCoeff();
    if (m == 1) {
      z(0, d) = 0.5 * (lo + hi);
    } else if (hi > lo) {
      z.col(d) = Eigen::VectorXd::LinSpaced(m, lo, hi);
    } else {
      for (Eigen::Index i = 0; i < m; ++i) {
        z(i, d) = lo + 1e-6 * static_cast<double>(i + 1);
      }
    }
  }
  return z;
}

}  // namespace gpad
