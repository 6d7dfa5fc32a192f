#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace gpad {

// Covariance functions over real-vector inputs.  A kernel is a tree: leaves
// are RBF / linear / periodic kernels, interior nodes are sums.  All
// hyperparameters are strictly positive; optimizers work on their logs via
// pack_kernel / unpack_kernel.
//
// Parameter layout (depth-first, log space):
//   RbfKernel       [log variance, log lengthscale]
//   LinearKernel    [log variance_1 .. log variance_d]
//   PeriodicKernel  [log variance, log lengthscale_1 .. log lengthscale_d,
//                    log period]
//   SumKernel       children concatenated in order

struct RbfKernel {
  double variance = 1.0;
  double lengthscale = 1.0;
};

// One variance per input dimension: k(x, x') = sum_d v_d x_d x'_d.
struct LinearKernel {
  Eigen::VectorXd variances;
};

// k(x, x') = v * exp(-1/2 * sum_d (sin(pi (x_d - x'_d) / T) / l_d)^2).
struct PeriodicKernel {
  double variance = 1.0;
  Eigen::VectorXd lengthscales;
  double period = 1.0;
};

struct KernelSpec;

struct SumKernel {
  std::vector<KernelSpec> children;
};

struct KernelSpec {
  std::variant<RbfKernel, LinearKernel, PeriodicKernel, SumKernel> node;

  KernelSpec() : node(RbfKernel{}) {}
  KernelSpec(RbfKernel k) : node(std::move(k)) {}
  KernelSpec(LinearKernel k) : node(std::move(k)) {}
  KernelSpec(PeriodicKernel k) : node(std::move(k)) {}
  KernelSpec(SumKernel k) : node(std::move(k)) {}
};

inline constexpr int kMaxKernelDepth = 4;

// ---------------------------------------------------------------------------
// Structure queries

// Input dimension the kernel requires, or -1 if it works for any dimension
// (a pure-RBF tree).
inline int kernel_input_dim(const KernelSpec& spec) {
  if (std::holds_alternative<RbfKernel>(spec.node)) {
    return -1;
  }
  if (const auto* lin = std::get_if<LinearKernel>(&spec.node)) {
    return static_cast<int>(lin->variances.size());
  }
  if (const auto* per = std::get_if<PeriodicKernel>(&spec.node)) {
    return static_cast<int>(per->lengthscales.size());
  }
  int dim = -1;
  for (const KernelSpec& child : std::get<SumKernel>(spec.node).children) {
    const int child_dim = kernel_input_dim(child);
    if (child_dim < 0) {
      continue;
    }
    if (dim >= 0 && dim != child_dim) {
      throw std::invalid_argument("sum kernel mixes input dimensions " +
                                  std::to_string(dim) + " and " +
                                  std::to_string(child_dim));
    }
    dim = child_dim;
  }
  return dim;
}

inline int kernel_parameter_count(const KernelSpec& spec) {
  if (std::holds_alternative<RbfKernel>(spec.node)) {
    return 2;
  }
  if (const auto* lin = std::get_if<LinearKernel>(&spec.node)) {
    return static_cast<int>(lin->variances.size());
  }
  if (const auto* per = std::get_if<PeriodicKernel>(&spec.node)) {
    return 2 + static_cast<int>(per->lengthscales.size());
  }
  int count = 0;
  for (const KernelSpec& child : std::get<SumKernel>(spec.node).children) {
    count += kernel_parameter_count(child);
  }
  return count;
}

namespace detail {

inline void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string(what) + " must be positive, got " +
                                std::to_string(value));
  }
}

inline void require_positive(const Eigen::VectorXd& values, const char* what) {
  if (values.size() == 0) {
    throw std::invalid_argument(std::string(what) + " must be non-empty");
  }
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    require_positive(values[i], what);
  }
}

inline void validate_node(const KernelSpec& spec, int depth) {
  if (depth > kMaxKernelDepth) {
    throw std::invalid_argument("kernel tree deeper than " +
                                std::to_string(kMaxKernelDepth) + " levels");
  }
  if (const auto* rbf = std::get_if<RbfKernel>(&spec.node)) {
    require_positive(rbf->variance, "RBF variance");
    require_positive(rbf->lengthscale, "RBF lengthscale");
  } else if (const auto* lin = std::get_if<LinearKernel>(&spec.node)) {
    require_positive(lin->variances, "linear variance");
  } else if (const auto* per = std::get_if<PeriodicKernel>(&spec.node)) {
    require_positive(per->variance, "periodic variance");
    require_positive(per->lengthscales, "periodic lengthscale");
    require_positive(per->period, "periodic period");
  } else {
    const auto& sum = std::get<SumKernel>(spec.node);
    if (sum.children.size() < 2) {
      throw std::invalid_argument("sum kernel needs at least two children");
    }
    for (const KernelSpec& child : sum.children) {
      validate_node(child, depth + 1);
    }
  }
}

inline void check_input_dim(const KernelSpec& spec, Eigen::Index cols) {
  const int dim = kernel_input_dim(spec);
  if (dim >= 0 && cols != dim) {
    throw std::invalid_argument("kernel expects " + std::to_string(dim) +
                                "-dimensional inputs, got " +
                                std::to_string(cols));
  }
}

}  // namespace detail

// Checks positivity of every hyperparameter, arity of sums, nesting depth,
// and that fixed-dimension leaves agree on the input dimension.
inline void validate_kernel(const KernelSpec& spec) {
  detail::validate_node(spec, 1);
  kernel_input_dim(spec);  // throws on dimension mismatch
}

// ---------------------------------------------------------------------------
// Log-space packing

namespace detail {

inline void pack_node(const KernelSpec& spec, Eigen::VectorXd& out,
                      Eigen::Index& at) {
  if (const auto* rbf = std::get_if<RbfKernel>(&spec.node)) {
    out[at++] = std::log(rbf->variance);
    out[at++] = std::log(rbf->lengthscale);
  } else if (const auto* lin = std::get_if<LinearKernel>(&spec.node)) {
    for (Eigen::Index i = 0; i < lin->variances.size(); ++i) {
      out[at++] = std::log(lin->variances[i]);
    }
  } else if (const auto* per = std::get_if<PeriodicKernel>(&spec.node)) {
    out[at++] = std::log(per->variance);
    for (Eigen::Index i = 0; i < per->lengthscales.size(); ++i) {
      out[at++] = std::log(per->lengthscales[i]);
    }
    out[at++] = std::log(per->period);
  } else {
    for (const KernelSpec& child : std::get<SumKernel>(spec.node).children) {
      pack_node(child, out, at);
    }
  }
}

inline void unpack_node(KernelSpec& spec, const Eigen::VectorXd& u,
                        Eigen::Index& at) {
  if (auto* rbf = std::get_if<RbfKernel>(&spec.node)) {
    rbf->variance = std::exp(u[at++]);
    rbf->lengthscale = std::exp(u[at++]);
  } else if (auto* lin = std::get_if<LinearKernel>(&spec.node)) {
    for (Eigen::Index i = 0; i < lin->variances.size(); ++i) {
      lin->variances[i] = std::exp(u[at++]);
    }
  } else if (auto* per = std::get_if<PeriodicKernel>(&spec.node)) {
    per->variance = std::exp(u[at++]);
    for (Eigen::Index i = 0; i < per->lengthscales.size(); ++i) {
      per->lengthscales[i] = std::exp(u[at++]);
    }
    per->period = std::exp(u[at++]);
  } else {
    for (KernelSpec& child : std::get<SumKernel>(spec.node).children) {
      unpack_node(child, u, at);
    }
  }
}

}  // namespace detail

inline Eigen::VectorXd pack_kernel(const KernelSpec& spec) {
  Eigen::VectorXd out(kernel_parameter_count(spec));
  Eigen::Index at = 0;
  detail::pack_node(spec, out, at);
  return out;
}

// Rebuilds a kernel with the same structure as `shape` and parameters
// exp(u).  `u` must have exactly kernel_parameter_count(shape) entries.
inline KernelSpec unpack_kernel(const KernelSpec& shape,
                                const Eigen::VectorXd& u) {
  if (u.size() != kernel_parameter_count(shape)) {
    throw std::invalid_argument(
        "parameter vector has " + std::to_string(u.size()) + " entries, kernel needs " +
        std::to_string(kernel_parameter_count(shape)));
  }
  KernelSpec result = shape;
  Eigen::Index at = 0;
  detail::unpack_node(result, u, at);
  return result;
}

// ---------------------------------------------------------------------------
// Gram matrices

namespace detail {

// |x_i - z_j|^2 for all pairs, clamped at zero against cancellation.
inline Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x,
                                         const Eigen::MatrixXd& z) {
  const Eigen::VectorXd xn = x.rowwise().squaredNorm();
  const Eigen::VectorXd zn = z.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = -2.0 * (x * z.transpose());
  d2.colwise() += xn;
  d2.rowwise() += zn.transpose();
  return d2.cwiseMax(0.0);
}

// x_i[col] - z_j[col] for all pairs.
inline Eigen::MatrixXd pairwise_diff(const Eigen::MatrixXd& x,
                                     const Eigen::MatrixXd& z,
                                     Eigen::Index col) {
  Eigen::MatrixXd d = -z.col(col).transpose().replicate(x.rows(), 1);
  d.colwise() += x.col(col);
  return d;
}

inline Eigen::MatrixXd gram_node(const KernelSpec& spec,
                                 const Eigen::MatrixXd& x,
                                 const Eigen::MatrixXd& z) {
  if (const auto* rbf = std::get_if<RbfKernel>(&spec.node)) {
    const double inv = -0.5 / (rbf->lengthscale * rbf->lengthscale);
    return rbf->variance * (inv * squared_distances(x, z).array()).exp().matrix();
  }
  if (const auto* lin = std::get_if<LinearKernel>(&spec.node)) {
    return x * lin->variances.asDiagonal() * z.transpose();
  }
  if (const auto* per = std::get_if<PeriodicKernel>(&spec.node)) {
    const double w = std::numbers::pi / per->period;
    Eigen::ArrayXXd quad = Eigen::ArrayXXd::Zero(x.rows(), z.rows());
    for (Eigen::Index d = 0; d < per->lengthscales.size(); ++d) {
      const Eigen::ArrayXXd s =
          (w * pairwise_diff(x, z, d).array()).sin() / per->lengthscales[d];
      quad += s.square();
    }
    return per->variance * (-0.5 * quad).exp().matrix();
  }
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(x.rows(), z.rows());
  for (const KernelSpec& child : std::get<SumKernel>(spec.node).children) {
    total += gram_node(child, x, z);
  }
  return total;
}

inline Eigen::VectorXd diag_node(const KernelSpec& spec,
                                 const Eigen::MatrixXd& x) {
  if (const auto* rbf = std::get_if<RbfKernel>(&spec.node)) {
    return Eigen::VectorXd::Constant(x.rows(), rbf->variance);
  }
  if (const auto* lin = std::get_if<LinearKernel>(&spec.node)) {
    return x.array().square().matrix() * lin->variances;
  }
  if (const auto* per = std::get_if<PeriodicKernel>(&spec.node)) {
    return Eigen::VectorXd::Constant(x.rows(), per->variance);
  }
  Eigen::VectorXd total = Eigen::VectorXd::Zero(x.rows());
  for (const KernelSpec& child : std::get<SumKernel>(spec.node).children) {
    total += diag_node(child, x);
  }
  return total;
}

}  // namespace detail

// Cross-covariance matrix K[i, j] = k(x_i, z_j).
inline Eigen::MatrixXd gram_matrix(const KernelSpec& spec,
                                   const Eigen::MatrixXd& x,
                                   const Eigen::MatrixXd& z) {
  if (x.cols() != z.cols()) {
    throw std::invalid_argument("gram_matrix inputs differ in dimension");
  }
  detail::check_input_dim(spec, x.cols());
  return detail::gram_node(spec, x, z);
}

// Diagonal of gram_matrix(spec, x, x), without forming the matrix.
inline Eigen::VectorXd gram_diagonal(const KernelSpec& spec,
                                     const Eigen::MatrixXd& x) {
  detail::check_input_dim(spec, x.cols());
  return detail::diag_node(spec, x);
}

inline double eval_kernel(const KernelSpec& spec, const Eigen::RowVectorXd& x,
                          const Eigen::RowVectorXd& z) {
  return gram_matrix(spec, x, z)(0, 0);
}

// ---------------------------------------------------------------------------
// Derivatives

// Cross-covariance together with its derivatives with respect to each
// log-space kernel parameter, in packing order.
struct GramGradients {
  Eigen::MatrixXd value;
  std::vector<Eigen::MatrixXd> by_parameter;
};

struct DiagGradients {
  Eigen::VectorXd value;
  std::vector<Eigen::VectorXd> by_parameter;
};

namespace detail {

inline Eigen::MatrixXd gram_grad_node(const KernelSpec& spec,
                                      const Eigen::MatrixXd& x,
                                      const Eigen::MatrixXd& z,
                                      std::vector<Eigen::MatrixXd>& grads) {
  if (const auto* rbf = std::get_if<RbfKernel>(&spec.node)) {
    const double l2 = rbf->lengthscale * rbf->lengthscale;
    const Eigen::MatrixXd d2 = squared_distances(x, z);
    Eigen::MatrixXd k =
        rbf->variance * ((-0.5 / l2) * d2.array()).exp().matrix();
    grads.push_back(k);                                 // d/d log variance
    grads.push_back(k.cwiseProduct(d2) / l2);           // d/d log lengthscale
    return k;
  }
  if (const auto* lin = std::get_if<LinearKernel>(&spec.node)) {
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(x.rows(), z.rows());
    for (Eigen::Index d = 0; d < lin->variances.size(); ++d) {
      Eigen::MatrixXd term =
          lin->variances[d] * (x.col(d) * z.col(d).transpose());
      k += term;
      grads.push_back(std::move(term));                 // d/d log variance_d
    }
    return k;
  }
  if (const auto* per = std::get_if<PeriodicKernel>(&spec.node)) {
    const Eigen::Index dims = per->lengthscales.size();
    const double w = std::numbers::pi / per->period;
    Eigen::ArrayXXd quad = Eigen::ArrayXXd::Zero(x.rows(), z.rows());
    Eigen::ArrayXXd period_sum = Eigen::ArrayXXd::Zero(x.rows(), z.rows());
    std::vector<Eigen::ArrayXXd> q_sq(dims);
    for (Eigen::Index d = 0; d < dims; ++d) {
      const double l_d = per->lengthscales[d];
      const Eigen::ArrayXXd delta = pairwise_diff(x, z, d).array();
      const Eigen::ArrayXXd angle = w * delta;
      const Eigen::ArrayXXd r = angle.sin();
      q_sq[d] = r.square() / (l_d * l_d);
      quad += q_sq[d];
      // d k / d log period = k * sum_d r cos(angle) angle / l_d^2
      period_sum += (r * angle.cos() * angle) / (l_d * l_d);
    }
    Eigen::ArrayXXd k = per->variance * (-0.5 * quad).exp();
    grads.push_back(k.matrix());                        // d/d log variance
    for (Eigen::Index d = 0; d < dims; ++d) {
      grads.push_back((k * q_sq[d]).matrix());          // d/d log lengthscale_d
    }
    grads.push_back((k * period_sum).matrix());         // d/d log period
    return k.matrix();
  }
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(x.rows(), z.rows());
  for (const KernelSpec& child : std::get<SumKernel>(spec.node).children) {
    total += gram_grad_node(child, x, z, grads);
  }
  return total;
}

inline Eigen::VectorXd diag_grad_node(const KernelSpec& spec,
                                      const Eigen::MatrixXd& x,
                                      std::vector<Eigen::VectorXd>& grads) {
  const Eigen::Index n = x.rows();
  if (const auto* rbf = std::get_if<RbfKernel>(&spec.node)) {
    Eigen::VectorXd k = Eigen::VectorXd::Constant(n, rbf->variance);
    grads.push_back(k);
    grads.push_back(Eigen::VectorXd::Zero(n));
    return k;
  }
  if (const auto* lin = std::get_if<LinearKernel>(&spec.node)) {
    Eigen::VectorXd k = Eigen::VectorXd::Zero(n);
    for (Eigen::Index d = 0; d < lin->variances.size(); ++d) {
      Eigen::VectorXd term =
          lin->variances[d] * x.col(d).array().square().matrix();
      k += term;
      grads.push_back(std::move(term));
    }
    return k;
  }
  if (const auto* per = std::get_if<PeriodicKernel>(&spec.node)) {
    Eigen::VectorXd k = Eigen::VectorXd::Constant(n, per->variance);
    grads.push_back(k);
    for (Eigen::Index d = 0; d < per->lengthscales.size() + 1; ++d) {
      grads.push_back(Eigen::VectorXd::Zero(n));
    }
    return k;
  }
  Eigen::VectorXd total = Eigen::VectorXd::Zero(n);
  for (const KernelSpec& child : std::get<SumKernel>(spec.node).children) {
    total += diag_grad_node(child, x, grads);
  }
  return total;
}

inline void second_arg_grad_node(const KernelSpec& spec,
                                 const Eigen::MatrixXd& x,
                                 const Eigen::MatrixXd& z,
                                 std::vector<Eigen::MatrixXd>& grads) {
  if (const auto* rbf = std::get_if<RbfKernel>(&spec.node)) {
    const double inv_l2 = 1.0 / (rbf->lengthscale * rbf->lengthscale);
    const Eigen::MatrixXd k =
        rbf->variance *
        ((-0.5 * inv_l2) * squared_distances(x, z).array()).exp().matrix();
    for (Eigen::Index d = 0; d < x.cols(); ++d) {
      grads[d] += inv_l2 * k.cwiseProduct(pairwise_diff(x, z, d));
    }
    return;
  }
  if (const auto* lin = std::get_if<LinearKernel>(&spec.node)) {
    for (Eigen::Index d = 0; d < lin->variances.size(); ++d) {
      grads[d] += lin->variances[d] * x.col(d).replicate(1, z.rows());
    }
    return;
  }
  if (const auto* per = std::get_if<PeriodicKernel>(&spec.node)) {
    const Eigen::Index dims = per->lengthscales.size();
    const double w = std::numbers::pi / per->period;
    Eigen::ArrayXXd quad = Eigen::ArrayXXd::Zero(x.rows(), z.rows());
    std::vector<Eigen::ArrayXXd> rc(dims);
    for (Eigen::Index d = 0; d < dims; ++d) {
      const Eigen::ArrayXXd angle = w * pairwise_diff(x, z, d).array();
      const Eigen::ArrayXXd r = angle.sin();
      quad += r.square() / (per->lengthscales[d] * per->lengthscales[d]);
      rc[d] = r * angle.cos();
    }
    const Eigen::ArrayXXd k = per->variance * (-0.5 * quad).exp();
    for (Eigen::Index d = 0; d < dims; ++d) {
      const double l_d = per->lengthscales[d];
      // d k / d z_d = k * (pi / (T l_d^2)) sin(angle) cos(angle)
      grads[d] += (k * rc[d] * (w / (l_d * l_d))).matrix();
    }
    return;
  }
  for (const KernelSpec& child : std::get<SumKernel>(spec.node).children) {
    second_arg_grad_node(child, x, z, grads);
  }
}

}  // namespace detail

inline GramGradients gram_with_param_gradients(const KernelSpec& spec,
                                               const Eigen::MatrixXd& x,
                                               const Eigen::MatrixXd& z) {
  if (x.cols() != z.cols()) {
    throw std::invalid_argument("gram inputs differ in dimension");
  }
  detail::check_input_dim(spec, x.cols());
  GramGradients out;
  out.by_parameter.reserve(kernel_parameter_count(spec));
  out.value = detail::gram_grad_node(spec, x, z, out.by_parameter);
  return out;
}

inline DiagGradients diagonal_with_param_gradients(const KernelSpec& spec,
                                                   const Eigen::MatrixXd& x) {
  detail::check_input_dim(spec, x.cols());
  DiagGradients out;
  out.by_parameter.reserve(kernel_parameter_count(spec));
  out.value = detail::diag_grad_node(spec, x, out.by_parameter);
  return out;
}

// d k(x_i, z_j) / d z_{j, dim}: one (rows(x) x rows(z)) matrix per input
// dimension.  Used for gradients with respect to inducing-point coordinates.
inline std::vector<Eigen::MatrixXd> gram_second_arg_gradients(
    const KernelSpec& spec, const Eigen::MatrixXd& x,
    const Eigen::MatrixXd& z) {
  if (x.cols() != z.cols()) {
    throw std::invalid_argument("gram inputs differ in dimension");
  }
  detail::check_input_dim(spec, x.cols());
  std::vector<Eigen::MatrixXd> grads(
      x.cols(), Eigen::MatrixXd::Zero(x.rows(), z.rows()));
  detail::second_arg_grad_node(spec, x, z, grads);
  return grads;
}

}  // namespace gpad
