#include "hrsm/simulate.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "hrsm/model.hpp"

namespace hrsm {

namespace {

constexpr long kProposalCap = 1000000;

// Cholesky factors of Sigma[k] and trends -Gamma_{-k,k}/2 for every anchor.
struct AnchorGaussians {
  std::vector<Matrixd> chol;
  std::vector<Vectord> trend;

  explicit AnchorGaussians(const Matrixd& gamma) {
    const Index d = gamma.rows();
    chol.reserve(d);
    trend.reserve(d);
    for (Index m = 0; m < d; ++m) {
      const Matrixd sigma = gamma_to_sigma(gamma, m);
      Eigen::LLT<Matrixd> llt(sigma);
      if (llt.info() != Eigen::Success) {
        throw std::runtime_error("sampler: Sigma[" + std::to_string(m + 1) +
                                 "] not positive definite (invalid variogram)");
      }
      chol.push_back(llt.matrixL());
      Vectord t(d - 1);
      for (Index a = 0; a < d - 1; ++a) t(a) = -gamma(a < m ? a : a + 1, m) / 2.0;
      trend.push_back(std::move(t));
    }
  }

  // Spectral function anchored at k: w_k = 1, w_{-k} = exp(L z + trend).
  void draw(Index k, SplitMix64& rng, Vectord& scratch, Vectord& w) const {
    const Index d = w.size();
    for (Index a = 0; a < d - 1; ++a) scratch(a) = rng.normal();
    const Vectord g = chol[k] * scratch + trend[k];
    for (Index a = 0; a < d - 1; ++a) w(a < k ? a : a + 1) = std::exp(g(a));
    w(k) = 1.0;
  }
};

}  // namespace

std::string to_string(SampleSource source) {
  return source == SampleSource::exact_pareto ? "exact_pareto" : "max_stable_thresholded";
}

Matrixd brownian_variogram(Index d) {
  if (d < 2) throw std::invalid_argument("brownian_variogram: d must be >= 2");
  Matrixd gamma(d, d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) gamma(i, j) = scale * std::abs(static_cast<double>(i - j));
  return gamma;
}

Matrixd tridiagonal_theta(Index d) {
  if (d < 2) throw std::invalid_argument("tridiagonal_theta: d must be >= 2");
  const double root = std::sqrt(static_cast<double>(d));
  Matrixd theta = Matrixd::Zero(d, d);
  for (Index j = 0; j < d; ++j) {
    theta(j, j) = (j == 0 || j == d - 1) ? root : 2.0 * root;
    if (j + 1 < d) {
      theta(j, j + 1) = -root;
      theta(j + 1, j) = -root;
    }
  }
  return theta;
}

ExceedanceBatch sample_hr_pareto(const Matrixd& gamma, Index n, SplitMix64& rng) {
  if (n < 1) throw std::invalid_argument("sample_hr_pareto: n must be >= 1");
  validate_variogram(gamma);
  const Index d = gamma.rows();
  const AnchorGaussians anchors(gamma);

  ExceedanceBatch batch;
  batch.samples.resize(n, d);
  batch.n_raw = n;
  batch.source = SampleSource::exact_pareto;

  Vectord scratch(d - 1), w(d);
  for (Index i = 0; i < n; ++i) {
    long proposals = 0;
    for (;;) {
      if (++proposals > kProposalCap) {
        throw std::runtime_error("sample_hr_pareto: proposal cap exceeded");
      }
      const Index k = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(d)));
      anchors.draw(k, rng, scratch, w);
      const double radius = rng.pareto();
      Index above = 0;
      for (Index j = 0; j < d; ++j) above += radius * w(j) > 1.0;
      if (rng.uniform01() * static_cast<double>(above) < 1.0) {
        batch.samples.row(i) = radius * w.transpose();
        break;
      }
    }
  }
  return batch;
}

Matrixd sample_max_stable(const Matrixd& gamma, Index n, SplitMix64& rng) {
  if (n < 1) throw std::invalid_argument("sample_max_stable: n must be >= 1");
  validate_variogram(gamma);
  const Index d = gamma.rows();
  const AnchorGaussians anchors(gamma);

  Matrixd out(n, d);
  Vectord scratch(d - 1), w(d), z(d);
  for (Index i = 0; i < n; ++i) {
    z.setZero();
    for (Index k = 0; k < d; ++k) {
      double arrival = rng.exponential();
      long drawn = 0;
      while (1.0 / arrival > z(k)) {
        if (++drawn > kProposalCap) {
          throw std::runtime_error("sample_max_stable: iteration cap exceeded");
        }
        anchors.draw(k, rng, scratch, w);
        // Functions reaching the current max at an earlier coordinate were
        // already accounted for in that coordinate's loop.
        bool counted_earlier = false;
        for (Index j = 0; j < k; ++j) {
          if (w(j) / arrival >= z(j)) {
            counted_earlier = true;
            break;
          }
        }
        if (!counted_earlier) {
          for (Index j = 0; j < d; ++j) z(j) = std::max(z(j), w(j) / arrival);
        }
        arrival += rng.exponential();
      }
    }
    out.row(i) = z.transpose();
  }
  return out;
}

double frechet_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("frechet_quantile: q must be in (0,1)");
  return -1.0 / std::log(q);
}

ExceedanceBatch threshold_exceedances(const Matrixd& raw, double quantile) {
  const double u = frechet_quantile(quantile);
  const Index n = raw.rows();
  std::vector<Index> keep;
  keep.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    if (raw.row(i).maxCoeff() > u) keep.push_back(i);
  }
  if (keep.empty()) throw std::runtime_error("threshold_exceedances: no exceedances above u");

  ExceedanceBatch batch;
  batch.samples.resize(static_cast<Index>(keep.size()), raw.cols());
  for (std::size_t r = 0; r < keep.size(); ++r) batch.samples.row(static_cast<Index>(r)) = raw.row(keep[r]) / u;
  batch.n_raw = n;
  batch.source = SampleSource::max_stable_thresholded;
  return batch;
}

}  // namespace hrsm
