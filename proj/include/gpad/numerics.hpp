#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace gpad {

// Thrown when a linear-algebra step cannot be completed at double precision
// (non-finite inputs, or a covariance that stays indefinite after jitter
// escalation).  The message carries enough context to identify the matrix.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Jitter fraction of the mean diagonal used when the plain Cholesky cannot be
// trusted, escalated one decade at a time before giving up.
inline constexpr double kJitterFraction = 1e-8;
inline constexpr int kJitterEscalations = 3;  // retries 1e-8, 1e-7, 1e-6

// A plain factorization whose pivot-based reciprocal condition estimate falls
// below this is treated as failed: LLT can "succeed" on a numerically singular
// matrix while its solves are garbage.
inline constexpr double kRcondFloor = 1e-10;

struct JitteredLlt {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;  // value actually added to the diagonal
};

// Cholesky of a symmetric PSD matrix with the standard jitter policy: the
// first attempt adds nothing, and jitter enters only when the plain
// factorization fails outright or is too ill-conditioned to trust.
// `context` names the matrix for error messages ("K + noise", "K_mm", ...).
inline JitteredLlt cholesky_with_jitter(const Eigen::MatrixXd& mat,
                                        const std::string& context) {
  if (!mat.allFinite()) {
    throw NumericalError("non-finite entries in " + context + " (" +
                         std::to_string(mat.rows()) + "x" +
                         std::to_string(mat.cols()) + ")");
  }
  const double mean_diag = mat.rows() > 0 ? mat.diagonal().mean() : 0.0;
  const double scale =
      mean_diag > 0.0 ? mean_diag : std::numeric_limits<double>::min();

  double jitter = 0.0;
  for (int attempt = 0; attempt <= kJitterEscalations; ++attempt) {
    jitter = attempt == 0 ? 0.0
                          : kJitterFraction * scale * std::pow(10.0, attempt - 1);
    Eigen::MatrixXd shifted = mat;
    shifted.diagonal().array() += jitter;
    JitteredLlt result{Eigen::LLT<Eigen::MatrixXd>(shifted), jitter};
    if (result.llt.info() == Eigen::Success) {
      if (attempt == 0 && mat.rows() > 0) {
        const auto pivots = result.llt.matrixLLT().diagonal();
        const double ratio = pivots.minCoeff() / pivots.maxCoeff();
        if (!(ratio * ratio >= kRcondFloor)) {
          continue;  // numerically singular; redo with jitter
        }
      }
      return result;
    }
  }

  std::ostringstream msg;
  msg << "Cholesky of " << context << " (" << mat.rows() << "x" << mat.cols()
      << ") failed after jitter up to " << jitter
      << "; mean diagonal " << mean_diag << ", min diagonal "
      << (mat.rows() > 0 ? mat.diagonal().minCoeff() : 0.0);
  throw NumericalError(msg.str());
}

// Sum of log-diagonal entries of a Cholesky factor, i.e. 1/2 * log det.
inline double half_log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace gpad
