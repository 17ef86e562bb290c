#pragma once

// Synthetic designs: Brownian-motion variograms, exact Huesler-Reiss
// Pareto samples on the sup-norm exceedance region, and max-stable samples
// with unit Frechet margins thresholded into the domain of attraction.

#include <string>

#include "hrsm/rng.hpp"
#include "hrsm/types.hpp"

namespace hrsm {

enum class SampleSource { exact_pareto, max_stable_thresholded };

std::string to_string(SampleSource source);

/// Rows in (0,inf)^d with sup-norm > 1; n_raw counts the generated samples
/// before thresholding (equal to rows() for the exact sampler).
struct ExceedanceBatch {
  Matrixd samples;
  Index n_raw = 0;
  SampleSource source = SampleSource::exact_pareto;

  Index n_u() const { return samples.rows(); }
};

/// Gamma_ij = |i-j| / sqrt(d), the variogram of a standard Brownian motion
/// on an equispaced grid.
Matrixd brownian_variogram(Index d);

/// The interaction matrix induced by the Brownian design: sqrt(d) at the
/// diagonal corners, 2 sqrt(d) on the interior diagonal, -sqrt(d) on the
/// sub/super-diagonal.
Matrixd tridiagonal_theta(Index d);

/// n i.i.d. draws from the Huesler-Reiss Pareto model on {||x||_inf > 1}.
/// Proposal: anchor k uniform, radius standard Pareto, jitter
/// exp(N(-Gamma_{-k,k}/2, Sigma[k])); accepted with probability
/// 1/#{j : x_j > 1}, which makes the mixture over anchors match the
/// exponent measure restricted to the exceedance region.
ExceedanceBatch sample_hr_pareto(const Matrixd& gamma, Index n, SplitMix64& rng);

/// n draws of the max-stable Huesler-Reiss vector with unit Frechet
/// margins via extremal functions: for each coordinate in turn, walk the
/// Poisson points anchored there and keep the componentwise maximum,
/// skipping functions that are dominated at an earlier coordinate.
Matrixd sample_max_stable(const Matrixd& gamma, Index n, SplitMix64& rng);

/// Analytic unit Frechet quantile -1/log(q).
double frechet_quantile(double q);

/// Keeps rows of raw with sup-norm above the Frechet quantile of the given
/// level and rescales them by it.
ExceedanceBatch threshold_exceedances(const Matrixd& raw, double quantile);

}  // namespace hrsm
