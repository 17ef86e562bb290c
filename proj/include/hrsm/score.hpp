#pragma once

// Weighted score-matching machinery: per-sample data functions f1/f2/F,
// the model score, the closed-form per-sample objective, its exact
// gradient in (mu, Theta), and the quadratic-curvature residual.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "hrsm/model.hpp"
#include "hrsm/types.hpp"

namespace hrsm {

/// Scalar weight w and its derivative w'.
template <class Scalar>
struct WeightFunction {
  std::function<Scalar(Scalar)> eval;
  std::function<Scalar(Scalar)> deriv;
};

template <class Scalar = double>
WeightFunction<Scalar> log_weight() {
  return {[](Scalar v) { return std::log(v); },
          [](Scalar v) { return Scalar(1) / v; }};
}

/// Precomputed per-sample vectors:
///   f1_j = w(x_j)
///   f2_j = 2 w(x_j)^2 + 4 x_j w'(x_j) w(x_j)
///   fdiag_j = 2 w(x_j)^2   (diagonal of the F matrix)
template <class Scalar>
struct SampleStats {
  Vector<Scalar> logx;
  Vector<Scalar> f1;
  Vector<Scalar> f2;
  Vector<Scalar> fdiag;
};

template <class Derived>
SampleStats<typename Derived::Scalar> sample_stats(
    const Eigen::MatrixBase<Derived>& x,
    const WeightFunction<typename Derived::Scalar>& w) {
  using Scalar = typename Derived::Scalar;
  detail::check_positive(x);
  const Index d = x.size();
  SampleStats<Scalar> s;
  s.logx.resize(d);
  s.f1.resize(d);
  s.f2.resize(d);
  s.fdiag.resize(d);
  for (Index j = 0; j < d; ++j) {
    const Scalar xj = x(j);
    const Scalar wj = w.eval(xj);
    s.logx(j) = std::log(xj);
    s.f1(j) = wj;
    s.fdiag(j) = Scalar(2) * wj * wj;
    s.f2(j) = s.fdiag(j) + Scalar(4) * xj * w.deriv(xj) * wj;
  }
  return s;
}

/// Model score s_j = (mu_j - 1 - (Theta log x)_j) / x_j, the gradient of
/// log_density_generalized in x.
template <class DerivedX, class DerivedM, class DerivedT>
Vector<typename DerivedX::Scalar> model_score(const Eigen::MatrixBase<DerivedX>& x,
                                              const Eigen::MatrixBase<DerivedM>& mu,
                                              const Eigen::MatrixBase<DerivedT>& theta) {
  using Scalar = typename DerivedX::Scalar;
  detail::check_positive(x);
  const Vector<Scalar> logx = x.array().log().matrix();
  const Vector<Scalar> resid = mu - Vector<Scalar>::Ones(x.size()) - theta * logx;
  return (resid.array() / x.derived().array()).matrix();
}

/// Per-sample objective
///   ||(mu - 1 - Theta logx) (.) f1||^2 + (mu - 1 - Theta logx)^T f2
///   - sum_j Theta_jj fdiag_j .
template <class DerivedM, class DerivedT, class Scalar>
Scalar objective_o(const Eigen::MatrixBase<DerivedM>& mu,
                   const Eigen::MatrixBase<DerivedT>& theta,
                   const SampleStats<Scalar>& stats) {
  const Vector<Scalar> resid =
      mu - Vector<Scalar>::Ones(mu.size()) - theta * stats.logx;
  return (resid.array() * stats.f1.array()).matrix().squaredNorm() + resid.dot(stats.f2) -
         theta.diagonal().dot(stats.fdiag);
}

template <class DerivedM, class DerivedT, class Scalar>
Scalar objective_sum(const Eigen::MatrixBase<DerivedM>& mu,
                     const Eigen::MatrixBase<DerivedT>& theta,
                     const std::vector<SampleStats<Scalar>>& batch) {
  if (batch.empty()) throw std::invalid_argument("objective_sum: empty batch");
  Scalar total(0);
  for (const auto& stats : batch) total += objective_o(mu, theta, stats);
  return total;
}

template <class Scalar>
struct Gradient {
  Vector<Scalar> d_mu;
  Matrix<Scalar> d_theta;  // symmetrized
};

namespace detail {

// Raw per-sample Theta-gradient, Theta treated as a free d x d matrix:
//   d/dTheta_jk = -2 r_j f1_j^2 logx_k - logx_k f2_j - fdiag_j 1{j=k},
//   d/dmu_j     =  2 r_j f1_j^2 + f2_j,            r = mu - 1 - Theta logx.
template <class DerivedM, class DerivedT, class Scalar>
void accumulate_raw_gradient(const Eigen::MatrixBase<DerivedM>& mu,
                             const Eigen::MatrixBase<DerivedT>& theta,
                             const SampleStats<Scalar>& stats, Vector<Scalar>& d_mu,
                             Matrix<Scalar>& d_theta) {
  const Vector<Scalar> resid =
      mu - Vector<Scalar>::Ones(mu.size()) - theta * stats.logx;
  const Vector<Scalar> rf = (resid.array() * stats.f1.array().square()).matrix();
  d_mu += Scalar(2) * rf + stats.f2;
  d_theta.noalias() -= (Scalar(2) * rf + stats.f2) * stats.logx.transpose();
  d_theta.diagonal() -= stats.fdiag;
}

}  // namespace detail

/// Exact gradient of objective_sum in (mu, Theta); the Theta block is
/// symmetrized as (G + G^T)/2 so it can be consumed as a gradient over the
/// symmetric matrices.
template <class DerivedM, class DerivedT, class Scalar>
Gradient<Scalar> gradient(const Eigen::MatrixBase<DerivedM>& mu,
                          const Eigen::MatrixBase<DerivedT>& theta,
                          const std::vector<SampleStats<Scalar>>& batch) {
  if (batch.empty()) throw std::invalid_argument("gradient: empty batch");
  const Index d = mu.size();
  Gradient<Scalar> g;
  g.d_mu = Vector<Scalar>::Zero(d);
  Matrix<Scalar> raw = Matrix<Scalar>::Zero(d, d);
  for (const auto& stats : batch) {
    detail::accumulate_raw_gradient(mu, theta, stats, g.d_mu, raw);
  }
  g.d_theta = (raw + raw.transpose()) / Scalar(2);
  return g;
}

/// Residual of the quadratic-curvature identity
///   sum_i o[mu',Theta'] - sum_i o[mu,Theta] - <sum_i grad o, (dmu, dTheta)>
///   - sum_i ||(dmu - dTheta logx_i) (.) f1_i||^2
/// which vanishes for all parameter pairs. Uses the raw (unsymmetrized)
/// Theta-gradient so the identity is exact for asymmetric inputs too.
template <class DM1, class DT1, class DM2, class DT2, class Scalar>
Scalar curvature_residual(const Eigen::MatrixBase<DM1>& mu, const Eigen::MatrixBase<DT1>& theta,
                          const Eigen::MatrixBase<DM2>& mu2,
                          const Eigen::MatrixBase<DT2>& theta2,
                          const std::vector<SampleStats<Scalar>>& batch) {
  if (batch.empty()) throw std::invalid_argument("curvature_residual: empty batch");
  const Index d = mu.size();
  const Vector<Scalar> delta_mu = mu2 - mu;
  const Matrix<Scalar> delta_theta = theta2 - theta;

  Vector<Scalar> d_mu = Vector<Scalar>::Zero(d);
  Matrix<Scalar> d_theta = Matrix<Scalar>::Zero(d, d);
  Scalar base(0), shifted(0), quad(0);
  for (const auto& stats : batch) {
    base += objective_o(mu, theta, stats);
    shifted += objective_o(mu2, theta2, stats);
    detail::accumulate_raw_gradient(mu, theta, stats, d_mu, d_theta);
    const Vector<Scalar> dir = delta_mu - delta_theta * stats.logx;
    quad += (dir.array() * stats.f1.array()).matrix().squaredNorm();
  }
  const Scalar inner = d_mu.dot(delta_mu) + (d_theta.array() * delta_theta.array()).sum();
  return std::abs(shifted - base - inner - quad);
}

}  // namespace hrsm
