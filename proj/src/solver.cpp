#include "hrsm/solver.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "hrsm/model.hpp"
#include "hrsm/rng.hpp"

namespace hrsm {

SufficientStats precompute(const Matrixd& samples, const WeightFunction<double>& weight) {
  const Index n = samples.rows();
  const Index d = samples.cols();
  if (n < 1) throw std::invalid_argument("precompute: empty batch");
  if (!(samples.minCoeff() > 0.0)) {
    throw std::invalid_argument("precompute: samples must be strictly positive");
  }

  Matrixd logx(n, d), f1sq(n, d), f2(n, d), fdiag(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) {
      const double x = samples(i, j);
      const double w = weight.eval(x);
      logx(i, j) = std::log(x);
      f1sq(i, j) = w * w;
      fdiag(i, j) = 2.0 * w * w;
      f2(i, j) = fdiag(i, j) + 4.0 * x * weight.deriv(x) * w;
    }
  }

  SufficientStats stats;
  stats.n = n;
  stats.d = d;
  stats.c = f1sq.colwise().sum();
  stats.b = f1sq.transpose() * logx;
  stats.s2 = f2.colwise().sum();
  stats.t = f2.transpose() * logx;
  stats.u = fdiag.colwise().sum();
  stats.gram.reserve(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) {
    const Matrixd weighted = logx.array().colwise() * f1sq.col(j).array();
    Matrixd gram = weighted.transpose() * logx;
    gram = ((gram + gram.transpose()) / 2.0).eval();
    stats.gram.push_back(std::move(gram));
  }
  return stats;
}

double objective_from_stats(const Vectord& mu, const Matrixd& theta,
                            const SufficientStats& stats) {
  double total = 0.0;
  for (Index j = 0; j < stats.d; ++j) {
    const auto row = theta.row(j).transpose();
    const double centered = mu(j) - 1.0;
    total += centered * centered * stats.c(j) - 2.0 * centered * row.dot(stats.b.row(j)) +
             row.dot(stats.gram[static_cast<std::size_t>(j)] * row) + centered * stats.s2(j) -
             row.dot(stats.t.row(j)) - theta(j, j) * stats.u(j);
  }
  return total;
}

void FitState::sync(const SufficientStats& stats) {
  theta = lambda_to_theta(lambda);
  gram_theta.resize(stats.d, stats.d);
  for (Index j = 0; j < stats.d; ++j) {
    gram_theta.row(j) =
        (stats.gram[static_cast<std::size_t>(j)] * theta.row(j).transpose()).transpose();
  }
  last_decrease = 0.0;
}

double update_mu(Index j, FitState& state, const SufficientStats& stats, double penalty_mu) {
  const double c = stats.c(j);
  state.last_decrease = 0.0;
  if (!(c > 0.0)) {
    state.degenerate = true;
    return state.mu(j);
  }
  // Objective in v = mu_j: c v^2 - beta v + penalty_mu |v| + const.
  const double beta = 2.0 * c + 2.0 * state.theta.row(j).dot(stats.b.row(j)) - stats.s2(j);
  const double old_v = state.mu(j);
  const double new_v =
      penalty_mu > 0.0 ? soft_threshold(beta, penalty_mu) / (2.0 * c) : beta / (2.0 * c);
  state.last_decrease = c * (new_v * new_v - old_v * old_v) - beta * (new_v - old_v) +
                        penalty_mu * (std::abs(new_v) - std::abs(old_v));
  state.mu(j) = new_v;
  return new_v;
}

namespace {

// Penalized objective along Lambda_jk = lambda0 + step, relative to step = 0.
struct CoordinateObjective {
  double curvature;  // alpha
  double slope;      // beta
  double penalty;
  double penalty_diag;
  double lambda0;
  double theta_jj;
  double theta_kk;

  double eval(double step) const {
    double value = curvature * step * step + slope * step +
                   penalty * (std::abs(lambda0 + step) - std::abs(lambda0));
    if (penalty_diag > 0.0) {
      value += penalty_diag * (std::abs(theta_jj - step) - std::abs(theta_jj) +
                               std::abs(theta_kk - step) - std::abs(theta_kk));
    }
    return value;
  }
};

// Exact minimizer of a 1-d quadratic plus up to three absolute-value kinks:
// evaluate the stationary point of each smooth piece and every kink.
double minimize_piecewise(const CoordinateObjective& f) {
  double kinks[3];
  int n_kinks = 0;
  kinks[n_kinks++] = -f.lambda0;
  if (f.penalty_diag > 0.0) {
    kinks[n_kinks++] = f.theta_jj;
    kinks[n_kinks++] = f.theta_kk;
  }
  std::sort(kinks, kinks + n_kinks);

  double best_step = 0.0;
  double best_value = 0.0;  // step = 0 keeps the coordinate as is
  auto consider = [&](double step) {
    const double value = f.eval(step);
    if (value < best_value) {
      best_value = value;
      best_step = step;
    }
  };

  for (int piece = 0; piece <= n_kinks; ++piece) {
    const double lo = piece == 0 ? -std::numeric_limits<double>::infinity() : kinks[piece - 1];
    const double hi =
        piece == n_kinks ? std::numeric_limits<double>::infinity() : kinks[piece];
    if (!(lo < hi)) continue;
    // Representative interior point fixes the sign of every kink term.
    double mid;
    if (!std::isfinite(lo)) {
      mid = hi - 1.0;
    } else if (!std::isfinite(hi)) {
      mid = lo + 1.0;
    } else {
      mid = (lo + hi) / 2.0;
    }
    const double slope = f.slope + f.penalty * (f.lambda0 + mid > 0.0 ? 1.0 : -1.0) -
                         f.penalty_diag * ((f.theta_jj - mid > 0.0 ? 1.0 : -1.0) +
                                           (f.theta_kk - mid > 0.0 ? 1.0 : -1.0));
    const double stationary = -slope / (2.0 * f.curvature);
    if (stationary > lo && stationary < hi) consider(stationary);
  }
  for (int i = 0; i < n_kinks; ++i) consider(kinks[i]);
  return best_step;
}

}  // namespace

double update_lambda(Index j, Index k, FitState& state, const SufficientStats& stats,
                     double penalty, double penalty_diag) {
  if (!(j < k)) throw std::invalid_argument("update_lambda: requires j < k");
  state.last_decrease = 0.0;
  const Matrixd& gram_j = stats.gram[static_cast<std::size_t>(j)];
  const Matrixd& gram_k = stats.gram[static_cast<std::size_t>(k)];

  const double curvature = gram_j(k, k) - 2.0 * gram_j(j, k) + gram_j(j, j) + gram_k(j, j) -
                           2.0 * gram_k(j, k) + gram_k(k, k);
  if (!(curvature > 0.0)) {
    state.degenerate = true;
    return state.lambda(j, k);
  }

  const double slope =
      -2.0 * (state.mu(j) - 1.0) * (stats.b(j, k) - stats.b(j, j)) +
      2.0 * (state.gram_theta(j, k) - state.gram_theta(j, j)) - (stats.t(j, k) - stats.t(j, j)) +
      stats.u(j) - 2.0 * (state.mu(k) - 1.0) * (stats.b(k, j) - stats.b(k, k)) +
      2.0 * (state.gram_theta(k, j) - state.gram_theta(k, k)) - (stats.t(k, j) - stats.t(k, k)) +
      stats.u(k);

  const double lambda0 = state.lambda(j, k);
  double step;
  if (penalty_diag > 0.0) {
    const CoordinateObjective f{curvature, slope,        penalty,       penalty_diag,
                                lambda0,   state.theta(j, j), state.theta(k, k)};
    step = minimize_piecewise(f);
    state.last_decrease = f.eval(step);
  } else {
    const double new_lambda = soft_threshold(2.0 * curvature * lambda0 - slope, penalty) /
                              (2.0 * curvature);
    step = new_lambda - lambda0;
    state.last_decrease = curvature * step * step + slope * step +
                          penalty * (std::abs(new_lambda) - std::abs(lambda0));
  }

  if (step != 0.0) {
    const double new_lambda = lambda0 + step;
    state.lambda(j, k) = new_lambda;
    state.theta(j, k) += step;
    state.theta(k, j) += step;
    state.theta(j, j) -= step;
    state.theta(k, k) -= step;
    state.gram_theta.row(j) += step * (gram_j.col(k) - gram_j.col(j)).transpose();
    state.gram_theta.row(k) += step * (gram_k.col(j) - gram_k.col(k)).transpose();
  }
  return state.lambda(j, k);
}

namespace {

double penalized_objective(const FitState& state, const SufficientStats& stats, double penalty,
                           double penalty_mu, double penalty_diag) {
  double value = objective_from_stats(state.mu, state.theta, stats);
  double l1 = 0.0;
  for (Index j = 0; j < stats.d; ++j)
    for (Index k = j + 1; k < stats.d; ++k) l1 += std::abs(state.lambda(j, k));
  value += penalty * l1;
  if (penalty_mu > 0.0) value += penalty_mu * state.mu.cwiseAbs().sum();
  if (penalty_diag > 0.0) value += penalty_diag * state.theta.diagonal().cwiseAbs().sum();
  return value;
}

}  // namespace

Estimate fit(const SufficientStats& stats, double r, const Estimate* init,
             const FitConfig& config) {
  if (!(r >= 0.0)) throw std::invalid_argument("fit: tuning parameter must be nonnegative");
  if (!(config.tol > 0.0) || config.max_sweeps < 1) {
    throw std::invalid_argument("fit: tol must be positive and max_sweeps >= 1");
  }
  const Index d = stats.d;
  const double penalty = std::sqrt(static_cast<double>(stats.n)) * r;
  const double penalty_mu = config.penalize_mu ? penalty : 0.0;
  const double penalty_diag = config.penalize_diag ? penalty : 0.0;

  FitState state;
  if (init != nullptr) {
    state.mu = init->mu;
    state.lambda = init->lambda;
  } else {
    state.mu = Vectord::Zero(d);
    state.lambda = Matrixd::Zero(d, d);
  }
  state.sync(stats);

  std::vector<std::pair<Index, Index>> order;
  order.reserve(static_cast<std::size_t>(d * (d - 1) / 2));
  for (Index j = 0; j < d; ++j)
    for (Index k = j + 1; k < d; ++k) order.emplace_back(j, k);
  SplitMix64 shuffle_rng(config.seed);

  double prev = penalized_objective(state, stats, penalty, penalty_mu, penalty_diag);
  int sweeps = 0;
  bool converged = false;
  while (sweeps < config.max_sweeps) {
    ++sweeps;
    if (config.seed != 0) {
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);
      }
    }
    for (Index j = 0; j < d; ++j) {
      update_mu(j, state, stats, penalty_mu);
      assert(state.last_decrease <= 1e-9 * (1.0 + std::abs(prev)));
    }
    for (const auto& [j, k] : order) {
      update_lambda(j, k, state, stats, penalty, penalty_diag);
      assert(state.last_decrease <= 1e-9 * (1.0 + std::abs(prev)));
    }
    const double current = penalized_objective(state, stats, penalty, penalty_mu, penalty_diag);
    if (prev - current < config.tol * (1.0 + std::abs(prev))) {
      prev = current;
      converged = true;
      break;
    }
    prev = current;
  }

  Estimate est;
  est.mu = state.mu;
  est.lambda = state.lambda;
  est.theta = lambda_to_theta(state.lambda);  // exact zero row sums
  est.objective = objective_from_stats(est.mu, est.theta, stats);
  est.sweeps_used = sweeps;
  est.converged = converged;
  est.degenerate = state.degenerate;
  return est;
}

Estimate fit_basic(const SufficientStats& stats, const FitConfig& config) {
  return fit(stats, 0.0, nullptr, config);
}

PathResult fit_path(const SufficientStats& stats, const std::vector<double>& grid,
                    const FitConfig& config) {
  if (grid.empty()) throw std::invalid_argument("fit_path: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0)) throw std::invalid_argument("fit_path: negative tuning parameter");
    if (i > 0 && !(grid[i] < grid[i - 1])) {
      throw std::invalid_argument("fit_path: grid must be strictly descending");
    }
  }
  PathResult path;
  path.grid = grid;
  path.estimates.reserve(grid.size());
  path.seconds.reserve(grid.size());
  const Estimate* warm = nullptr;
  for (const double r : grid) {
    const auto start = std::chrono::steady_clock::now();
    path.estimates.push_back(fit(stats, r, warm, config));
    const auto stop = std::chrono::steady_clock::now();
    path.seconds.push_back(std::chrono::duration<double>(stop - start).count());
    warm = &path.estimates.back();
  }
  return path;
}

}  // namespace hrsm
