#pragma once

// Parameter representations of the Huesler-Reiss model and the exact
// conversions between them: variogram Gamma, anchored covariance Sigma[m],
// location mu, strictly upper-triangular Lambda, and the symmetric
// zero-row-sum interaction matrix Theta. Anchor indices are 0-based here;
// user-facing layers (CLI, file formats) are 1-based.

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "hrsm/types.hpp"

namespace hrsm {

template <class Scalar>
struct MuLambda {
  Vector<Scalar> mu;
  Matrix<Scalar> lambda;
};

namespace detail {

inline void check_anchor(Index d, Index m) {
  if (m < 0 || m >= d) {
    throw std::invalid_argument("anchor index " + std::to_string(m + 1) +
                                " out of range 1.." + std::to_string(d));
  }
}

// Orthonormal basis of the zero-sum subspace {c : sum c_j = 0}, as the
// columns of a d x (d-1) matrix (Helmert construction).
template <class Scalar>
Matrix<Scalar> zero_sum_basis(Index d) {
  Matrix<Scalar> basis = Matrix<Scalar>::Zero(d, d - 1);
  for (Index k = 1; k < d; ++k) {
    const Scalar norm = std::sqrt(Scalar(k) * Scalar(k + 1));
    for (Index j = 0; j < k; ++j) basis(j, k - 1) = Scalar(1) / norm;
    basis(k, k - 1) = -Scalar(k) / norm;
  }
  return basis;
}

}  // namespace detail

/// True iff gamma is symmetric with zero diagonal and conditionally
/// strictly negative definite (largest eigenvalue of the zero-sum
/// projection below -1e-10 * max|gamma|).
template <class Derived>
bool is_valid_variogram(const Eigen::MatrixBase<Derived>& gamma) {
  using Scalar = typename Derived::Scalar;
  const Index d = gamma.rows();
  if (d < 2 || gamma.cols() != d) return false;
  const Scalar scale = gamma.cwiseAbs().maxCoeff();
  if (!((gamma - gamma.transpose()).cwiseAbs().maxCoeff() <= Scalar(1e-12) * scale)) return false;
  if (!(gamma.diagonal().cwiseAbs().maxCoeff() <= Scalar(1e-12) * scale)) return false;
  const Matrix<Scalar> basis = detail::zero_sum_basis<Scalar>(d);
  const Matrix<Scalar> projected = basis.transpose() * gamma * basis;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(projected, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff() < -Scalar(1e-10) * scale;
}

template <class Derived>
void validate_variogram(const Eigen::MatrixBase<Derived>& gamma) {
  if (!is_valid_variogram(gamma)) {
    throw std::invalid_argument(
        "invalid variogram: expected a symmetric, zero-diagonal, "
        "conditionally strictly negative-definite matrix");
  }
}

/// Covariance matrix Sigma[m] anchored at m. Entry (a,b) of the
/// (d-1)x(d-1) result uses the shifted full-matrix indices
/// f(a) = a for a < m and f(a) = a+1 otherwise:
///   Sigma_ab = (Gamma_{f(a),m} + Gamma_{m,f(b)} - Gamma_{f(a),f(b)}) / 2
template <class Derived>
Matrix<typename Derived::Scalar> gamma_to_sigma(const Eigen::MatrixBase<Derived>& gamma,
                                                Index m) {
  using Scalar = typename Derived::Scalar;
  const Index d = gamma.rows();
  detail::check_anchor(d, m);
  Matrix<Scalar> sigma(d - 1, d - 1);
  for (Index a = 0; a < d - 1; ++a) {
    const Index fa = a < m ? a : a + 1;
    for (Index b = 0; b < d - 1; ++b) {
      const Index fb = b < m ? b : b + 1;
      sigma(a, b) = (gamma(fa, m) + gamma(m, fb) - gamma(fa, fb)) / Scalar(2);
    }
  }
  return sigma;
}

/// Smallest eigenvalue > 0, i.e. symmetric positive definite.
template <class Derived>
bool is_positive_definite(const Eigen::MatrixBase<Derived>& sigma) {
  using Scalar = typename Derived::Scalar;
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) return false;
  const Scalar scale = sigma.cwiseAbs().maxCoeff();
  if (!((sigma - sigma.transpose()).cwiseAbs().maxCoeff() <= Scalar(1e-10) * scale)) return false;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(sigma, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() > Scalar(0);
}

/// Inverse of gamma_to_sigma. Diagonal entries recover the Gamma column at
/// the anchor, off-diagonal pairs recover the rest:
///   Gamma_{f(a),m} = Sigma_aa,
///   Gamma_{f(a),f(b)} = Sigma_aa + Sigma_bb - 2 Sigma_ab.
template <class Derived>
Matrix<typename Derived::Scalar> sigma_to_gamma(const Eigen::MatrixBase<Derived>& sigma,
                                                Index m) {
  using Scalar = typename Derived::Scalar;
  const Index d = sigma.rows() + 1;
  detail::check_anchor(d, m);
  if (sigma.cols() != sigma.rows()) {
    throw std::invalid_argument("sigma_to_gamma: matrix must be square");
  }
  Matrix<Scalar> gamma = Matrix<Scalar>::Zero(d, d);
  for (Index a = 0; a < d - 1; ++a) {
    const Index fa = a < m ? a : a + 1;
    gamma(fa, m) = sigma(a, a);
    gamma(m, fa) = sigma(a, a);
    for (Index b = 0; b < d - 1; ++b) {
      if (a == b) continue;
      const Index fb = b < m ? b : b + 1;
      gamma(fa, fb) = sigma(a, a) + sigma(b, b) - Scalar(2) * sigma(a, b);
    }
  }
  return gamma;
}

/// Location mu and strictly upper-triangular Lambda of the disentangled
/// parametrization, anchored at m. With P = Sigma[m]^{-1} and
/// q = P Gamma_{-m,m}:
///   mu_j = -q_{r(j)}/2 for j != m,   mu_m = sum(q)/2 - 1,
///   Lambda_jk = P_{r(j),r(k)} for j<k off the anchor,
///   Lambda_mk = -colsum_k(P),   Lambda_jm = -rowsum_j(P),
/// where r drops the anchor from the index range.
template <class Derived>
MuLambda<typename Derived::Scalar> hr_to_mu_lambda(const Eigen::MatrixBase<Derived>& gamma,
                                                   Index m) {
  using Scalar = typename Derived::Scalar;
  const Index d = gamma.rows();
  detail::check_anchor(d, m);
  const Matrix<Scalar> sigma = gamma_to_sigma(gamma, m);
  Eigen::LLT<Matrix<Scalar>> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("hr_to_mu_lambda: Sigma[m] not positive definite "
                             "(invalid variogram input)");
  }
  const Matrix<Scalar> prec = llt.solve(Matrix<Scalar>::Identity(d - 1, d - 1));

  Vector<Scalar> gamma_col(d - 1);
  for (Index a = 0; a < d - 1; ++a) gamma_col(a) = gamma(a < m ? a : a + 1, m);
  const Vector<Scalar> q = prec * gamma_col;

  MuLambda<Scalar> out;
  out.mu.resize(d);
  for (Index a = 0; a < d - 1; ++a) out.mu(a < m ? a : a + 1) = -q(a) / Scalar(2);
  out.mu(m) = q.sum() / Scalar(2) - Scalar(1);

  const Vector<Scalar> row_sums = prec.rowwise().sum();
  out.lambda = Matrix<Scalar>::Zero(d, d);
  auto reduced = [m](Index j) { return j < m ? j : j - 1; };
  for (Index j = 0; j < d; ++j) {
    for (Index k = j + 1; k < d; ++k) {
      if (j == m) {
        out.lambda(j, k) = -prec.col(reduced(k)).sum();
      } else if (k == m) {
        out.lambda(j, k) = -row_sums(reduced(j));
      } else {
        out.lambda(j, k) = prec(reduced(j), reduced(k));
      }
    }
  }
  return out;
}

/// Theta = Lambda + Lambda^T - diag(Lambda 1 + Lambda^T 1); symmetric with
/// exactly vanishing row and column sums.
template <class Derived>
Matrix<typename Derived::Scalar> lambda_to_theta(const Eigen::MatrixBase<Derived>& lambda) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> theta = lambda + lambda.transpose();
  theta -= Matrix<Scalar>((lambda.rowwise().sum() + lambda.transpose().rowwise().sum())
                              .asDiagonal());
  return theta;
}

/// Strictly upper part of a symmetric zero-row-sum theta; rejects inputs
/// whose row sums exceed 1e-8 relative to max|theta|.
template <class Derived>
Matrix<typename Derived::Scalar> theta_to_lambda(const Eigen::MatrixBase<Derived>& theta) {
  using Scalar = typename Derived::Scalar;
  const Index d = theta.rows();
  if (theta.cols() != d) throw std::invalid_argument("theta_to_lambda: matrix must be square");
  const Scalar scale = std::max(theta.cwiseAbs().maxCoeff(), Scalar(1));
  if ((theta - theta.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-8) * scale) {
    throw std::invalid_argument("theta_to_lambda: matrix not symmetric");
  }
  if (theta.rowwise().sum().cwiseAbs().maxCoeff() > Scalar(1e-8) * scale) {
    throw std::invalid_argument("theta_to_lambda: row sums not zero");
  }
  Matrix<Scalar> lambda = Matrix<Scalar>::Zero(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index k = j + 1; k < d; ++k) lambda(j, k) = theta(j, k);
  return lambda;
}

/// Variogram reconstructed from theta through the anchored minor:
/// Sigma[m] = (Theta_{-m,-m})^{-1}, then sigma_to_gamma. For exactly
/// zero-row-sum theta the result does not depend on m. Rejects minors that
/// are non-positive-definite or with condition number above 1e12.
template <class Derived>
Matrix<typename Derived::Scalar> theta_to_gamma(const Eigen::MatrixBase<Derived>& theta,
                                                Index m) {
  using Scalar = typename Derived::Scalar;
  const Index d = theta.rows();
  detail::check_anchor(d, m);
  Matrix<Scalar> minor(d - 1, d - 1);
  for (Index a = 0; a < d - 1; ++a) {
    const Index fa = a < m ? a : a + 1;
    for (Index b = 0; b < d - 1; ++b) minor(a, b) = theta(fa, b < m ? b : b + 1);
  }
  minor = ((minor + minor.transpose()) / Scalar(2)).eval();
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(minor);
  const auto& vals = eig.eigenvalues();
  const Scalar lo = vals.minCoeff();
  const Scalar hi = vals.maxCoeff();
  if (!(lo > Scalar(0)) || hi / lo > Scalar(1e12)) {
    throw std::runtime_error("theta_to_gamma: Theta minor at anchor " + std::to_string(m + 1) +
                             " (1-based) is singular or ill-conditioned");
  }
  const Matrix<Scalar> sigma =
      eig.eigenvectors() * vals.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  return sigma_to_gamma(sigma, m);
}

namespace detail {

template <class Derived>
void check_positive(const Eigen::MatrixBase<Derived>& x) {
  if (x.size() == 0 || !(x.minCoeff() > typename Derived::Scalar(0))) {
    throw std::invalid_argument("point must have strictly positive coordinates");
  }
}

// log of the N(mean, cov) density at y, via Cholesky.
template <class Scalar>
Scalar gaussian_log_density(const Vector<Scalar>& y, const Vector<Scalar>& mean,
                            const Matrix<Scalar>& cov) {
  Eigen::LLT<Matrix<Scalar>> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("gaussian_log_density: covariance not positive definite");
  }
  const Index k = y.size();
  const Vector<Scalar> z = llt.matrixL().solve(y - mean);
  Scalar log_det_half = Scalar(0);
  for (Index j = 0; j < k; ++j) log_det_half += std::log(llt.matrixL()(j, j));
  return -Scalar(0.5) * Scalar(k) * std::log(Scalar(2) * Scalar(EIGEN_PI)) - log_det_half -
         Scalar(0.5) * z.squaredNorm();
}

}  // namespace detail

/// Unnormalized log-density of the generalized model:
/// -sum_j log x_j + mu^T log x - (1/2) (log x)^T Theta (log x).
template <class DerivedX, class DerivedM, class DerivedT>
typename DerivedX::Scalar log_density_generalized(const Eigen::MatrixBase<DerivedX>& x,
                                                  const Eigen::MatrixBase<DerivedM>& mu,
                                                  const Eigen::MatrixBase<DerivedT>& theta) {
  using Scalar = typename DerivedX::Scalar;
  detail::check_positive(x);
  const Vector<Scalar> logx = x.array().log().matrix();
  return -logx.sum() + mu.dot(logx) - Scalar(0.5) * logx.dot(theta * logx);
}

/// Unnormalized log-density of the classical parametrization (normalizing
/// constant dropped, Gaussian factor kept):
/// -log x_m - sum_j log x_j + log N(log(x_{-m}/x_m); -Gamma_{-m,m}/2, Sigma[m]).
template <class DerivedX, class DerivedG>
typename DerivedX::Scalar log_density_classical(const Eigen::MatrixBase<DerivedX>& x,
                                                const Eigen::MatrixBase<DerivedG>& gamma,
                                                Index m) {
  using Scalar = typename DerivedX::Scalar;
  const Index d = gamma.rows();
  detail::check_anchor(d, m);
  detail::check_positive(x);
  const Vector<Scalar> logx = x.array().log().matrix();
  Vector<Scalar> ratio(d - 1), mean(d - 1);
  for (Index a = 0; a < d - 1; ++a) {
    const Index fa = a < m ? a : a + 1;
    ratio(a) = logx(fa) - logx(m);
    mean(a) = -gamma(fa, m) / Scalar(2);
  }
  const Matrix<Scalar> sigma = gamma_to_sigma(gamma, m);
  return -logx(m) - logx.sum() + detail::gaussian_log_density<Scalar>(ratio, mean, sigma);
}

}  // namespace hrsm
