#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hrsm/model.hpp"
#include "test_util.hpp"

using namespace hrsm;
using namespace hrsm::testing;

namespace {

Matrixd two_point_variogram(double off) {
  Matrixd gamma(2, 2);
  gamma << 0.0, off, off, 0.0;
  return gamma;
}

}  // namespace

TEST_CASE("variogram validation") {
  SplitMix64 rng(101);
  CHECK(is_valid_variogram(two_point_variogram(1.0)));
  CHECK(is_valid_variogram(random_variogram(7, rng)));

  Matrixd bad = two_point_variogram(1.0);
  bad(0, 1) = 2.0;  // asymmetric
  CHECK_FALSE(is_valid_variogram(bad));

  Matrixd diag = two_point_variogram(1.0);
  diag(0, 0) = 0.5;
  CHECK_FALSE(is_valid_variogram(diag));

  // Gamma_ij = -1 off the diagonal is positive on the zero-sum subspace.
  Matrixd flipped = Matrixd::Constant(4, 4, -1.0);
  flipped.diagonal().setZero();
  CHECK_FALSE(is_valid_variogram(flipped));
  CHECK_THROWS_AS(validate_variogram(flipped), std::invalid_argument);
}

TEST_CASE("gamma_to_sigma two-point fixture") {
  const Matrixd sigma = gamma_to_sigma(two_point_variogram(1.0), 0);
  REQUIRE(sigma.rows() == 1);
  CHECK(sigma(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("gamma_to_sigma Brownian d=3 fixture") {
  // Hand evaluation of the four-case formula at m=1 (1-based):
  // Sigma = [[1, 1], [1, 2]] / sqrt(3).
  Matrixd gamma(3, 3);
  const double s = 1.0 / std::sqrt(3.0);
  gamma << 0, s, 2 * s, s, 0, s, 2 * s, s, 0;
  const Matrixd sigma = gamma_to_sigma(gamma, 0);
  CHECK(sigma(0, 0) == doctest::Approx(s).epsilon(1e-14));
  CHECK(sigma(0, 1) == doctest::Approx(s).epsilon(1e-14));
  CHECK(sigma(1, 0) == doctest::Approx(s).epsilon(1e-14));
  CHECK(sigma(1, 1) == doctest::Approx(2 * s).epsilon(1e-14));
  CHECK(is_positive_definite(sigma));
}

TEST_CASE("sigma/gamma round trips") {
  SplitMix64 rng(7);
  SUBCASE("one-point inverse fixture") {
    Matrixd sigma(1, 1);
    sigma << 1.0;
    const Matrixd gamma = sigma_to_gamma(sigma, 0);
    CHECK(gamma(0, 1) == doctest::Approx(1.0));
    CHECK(gamma(1, 0) == doctest::Approx(1.0));
    CHECK(gamma(0, 0) == 0.0);
  }
  SUBCASE("gamma -> sigma -> gamma, all anchors") {
    for (Index d : {3, 5, 20}) {
      const Matrixd gamma = random_variogram(d, rng);
      for (Index m = 0; m < d; ++m) {
        const Matrixd sigma = gamma_to_sigma(gamma, m);
        CHECK(is_positive_definite(sigma));
        const Matrixd back = sigma_to_gamma(sigma, m);
        CHECK((back - gamma).cwiseAbs().maxCoeff() < 1e-12 * gamma.cwiseAbs().maxCoeff());
      }
    }
  }
  SUBCASE("sigma -> gamma -> sigma on random SPD") {
    const Matrixd sigma = random_spd(4, rng);
    for (Index m = 0; m < 5; ++m) {
      const Matrixd back = gamma_to_sigma(sigma_to_gamma(sigma, m), m);
      CHECK((back - sigma).cwiseAbs().maxCoeff() < 1e-12 * sigma.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("hr_to_mu_lambda two-point fixture") {
  // Hand evaluation of the case table at d=2, m=1 (1-based), Gamma_12 = 1:
  // Sigma = [1], q = 1, mu = (-1/2, -1/2), Lambda_12 = -1.
  const auto parts = hr_to_mu_lambda(two_point_variogram(1.0), 0);
  CHECK(parts.mu(0) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(parts.mu(1) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(parts.lambda(0, 1) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(parts.lambda(1, 0) == 0.0);
  CHECK(parts.lambda(0, 0) == 0.0);

  // Same values from the other anchor.
  const auto alt = hr_to_mu_lambda(two_point_variogram(1.0), 1);
  CHECK(alt.mu(0) == doctest::Approx(-0.5));
  CHECK(alt.lambda(0, 1) == doctest::Approx(-1.0));
}

TEST_CASE("hr_to_mu_lambda is strictly upper triangular") {
  SplitMix64 rng(21);
  const Matrixd gamma = random_variogram(6, rng);
  for (Index m = 0; m < 6; ++m) {
    const auto parts = hr_to_mu_lambda(gamma, m);
    for (Index j = 0; j < 6; ++j)
      for (Index k = 0; k <= j; ++k) CHECK(parts.lambda(j, k) == 0.0);
  }
}

TEST_CASE("lambda_to_theta") {
  SUBCASE("zero") {
    CHECK(lambda_to_theta(Matrixd::Zero(3, 3)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("two-point sign fixture") {
    Matrixd lambda = Matrixd::Zero(2, 2);
    lambda(0, 1) = 0.7;
    const Matrixd theta = lambda_to_theta(lambda);
    CHECK(theta(0, 0) == doctest::Approx(-0.7));
    CHECK(theta(0, 1) == doctest::Approx(0.7));
    CHECK(theta(1, 0) == doctest::Approx(0.7));
    CHECK(theta(1, 1) == doctest::Approx(-0.7));
  }
  SUBCASE("row sums vanish, scale-relative") {
    SplitMix64 rng(33);
    for (Index d : {2, 6, 12, 20}) {
      const Matrixd theta = lambda_to_theta(random_upper(d, rng, 3.0));
      const double scale = theta.cwiseAbs().maxCoeff();
      CHECK(theta.rowwise().sum().cwiseAbs().maxCoeff() < 1e-13 * scale);
      CHECK(theta.colwise().sum().cwiseAbs().maxCoeff() < 1e-13 * scale);
      CHECK((theta - theta.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("theta_to_lambda") {
  SUBCASE("zero") { CHECK(theta_to_lambda(Matrixd::Zero(4, 4)).cwiseAbs().maxCoeff() == 0.0); }
  SUBCASE("round trip d=8") {
    SplitMix64 rng(5);
    const Matrixd lambda = random_upper(8, rng);
    const Matrixd theta = lambda_to_theta(lambda);
    CHECK((theta_to_lambda(theta) - lambda).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((lambda_to_theta(theta_to_lambda(theta)) - theta).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("tridiagonal d=5 has d-1 non-zeros of -sqrt(d)") {
    Matrixd theta(5, 5);
    const double root = std::sqrt(5.0);
    theta.setZero();
    for (Index j = 0; j < 5; ++j) {
      theta(j, j) = (j == 0 || j == 4) ? root : 2 * root;
      if (j + 1 < 5) theta(j, j + 1) = theta(j + 1, j) = -root;
    }
    const Matrixd lambda = theta_to_lambda(theta);
    Index nonzero = 0;
    for (Index j = 0; j < 5; ++j) {
      for (Index k = j + 1; k < 5; ++k) {
        if (lambda(j, k) != 0.0) {
          ++nonzero;
          CHECK(lambda(j, k) == doctest::Approx(-root).epsilon(1e-14));
        }
      }
    }
    CHECK(nonzero == 4);
  }
  SUBCASE("rejects non-zero row sums") {
    Matrixd bad = Matrixd::Identity(3, 3);
    CHECK_THROWS_AS(theta_to_lambda(bad), std::invalid_argument);
  }
}

TEST_CASE("theta_to_gamma") {
  SplitMix64 rng(77);
  SUBCASE("full-chain round trip, all anchor pairs") {
    Matrixd gamma(5, 5);
    for (Index i = 0; i < 5; ++i)
      for (Index j = 0; j < 5; ++j) gamma(i, j) = std::abs(double(i - j)) / std::sqrt(5.0);
    for (Index m = 0; m < 5; ++m) {
      const Matrixd theta = lambda_to_theta(hr_to_mu_lambda(gamma, m).lambda);
      for (Index m2 = 0; m2 < 5; ++m2) {
        CHECK((theta_to_gamma(theta, m2) - gamma).cwiseAbs().maxCoeff() < 1e-8);
      }
    }
  }
  SUBCASE("m-invariance on random valid theta") {
    for (Index d : {3, 6, 10}) {
      const Matrixd gamma = random_variogram(d, rng);
      const Matrixd theta = lambda_to_theta(hr_to_mu_lambda(gamma, 0).lambda);
      const Matrixd ref = theta_to_gamma(theta, 0);
      for (Index m = 1; m < d; ++m) {
        CHECK((theta_to_gamma(theta, m) - ref).cwiseAbs().maxCoeff() < 1e-8);
      }
    }
  }
  SUBCASE("zero theta is singular") {
    CHECK_THROWS_AS(theta_to_gamma(Matrixd::Zero(4, 4), 0), std::runtime_error);
  }
}

TEST_CASE("log_density_generalized") {
  SplitMix64 rng(13);
  SUBCASE("ones at zero parameters") {
    CHECK(log_density_generalized(Vectord::Ones(4), Vectord::Zero(4), Matrixd::Zero(4, 4)) ==
          doctest::Approx(0.0));
  }
  SUBCASE("zero parameters reduce to -sum log") {
    const Vectord x = random_positive_point(5, rng);
    CHECK(log_density_generalized(x, Vectord::Zero(5), Matrixd::Zero(5, 5)) ==
          doctest::Approx(-x.array().log().sum()).epsilon(1e-13));
  }
  SUBCASE("trace form matches an elementwise double loop") {
    const auto params = random_params(3, rng);
    const Vectord x = random_positive_point(3, rng);
    const Vectord logx = x.array().log().matrix();
    double expected = -logx.sum() + params.mu.dot(logx);
    for (Index j = 0; j < 3; ++j)
      for (Index k = 0; k < 3; ++k) expected -= 0.5 * params.theta(j, k) * logx(j) * logx(k);
    CHECK(log_density_generalized(x, params.mu, params.theta) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("rejects non-positive coordinates") {
    Vectord x = Vectord::Ones(3);
    x(1) = 0.0;
    CHECK_THROWS_AS(log_density_generalized(x, Vectord::Zero(3), Matrixd::Zero(3, 3)),
                    std::invalid_argument);
  }
}

TEST_CASE("log_density_classical two-point fixture") {
  // x = (1,1), Gamma_12 = 1, m = 1: Gaussian log-density of 0 under
  // N(-1/2, 1), i.e. -log(2 pi)/2 - 1/8.
  const Vectord x = Vectord::Ones(2);
  const double expected = -0.5 * std::log(2.0 * EIGEN_PI) - 0.125;
  CHECK(log_density_classical(x, two_point_variogram(1.0), 0) ==
        doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("density equality: generalized minus classical is constant in x") {
  SplitMix64 rng(99);
  for (Index d : {2, 4, 7}) {
    const Matrixd gamma = random_variogram(d, rng);
    for (Index m = 0; m < d; ++m) {
      const auto parts = hr_to_mu_lambda(gamma, m);
      const Matrixd theta = lambda_to_theta(parts.lambda);
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (int trial = 0; trial < 50; ++trial) {
        const Vectord x = random_positive_point(d, rng);
        const double diff = log_density_generalized(x, parts.mu, theta) -
                            log_density_classical(x, gamma, m);
        lo = std::min(lo, diff);
        hi = std::max(hi, diff);
      }
      CHECK(hi - lo < 1e-9);
    }
  }
}

TEST_CASE("scaling a point shifts both log densities by -(d+1) log c") {
  SplitMix64 rng(55);
  const Index d = 4;
  const Matrixd gamma = random_variogram(d, rng);
  const auto parts = hr_to_mu_lambda(gamma, 2);
  const Matrixd theta = lambda_to_theta(parts.lambda);
  const Vectord x = random_positive_point(d, rng);
  for (double c : {2.0, 10.0, 0.5}) {
    const double shift = -(double(d) + 1.0) * std::log(c);
    CHECK(log_density_classical((c * x).eval(), gamma, 2) - log_density_classical(x, gamma, 2) ==
          doctest::Approx(shift).epsilon(1e-10));
    CHECK(log_density_generalized((c * x).eval(), parts.mu, theta) -
              log_density_generalized(x, parts.mu, theta) ==
          doctest::Approx(shift).epsilon(1e-10));
  }
}

TEST_CASE("chain round trip gamma -> (mu,lambda) -> theta -> gamma at d=20") {
  SplitMix64 rng(123);
  const Matrixd gamma = random_variogram(20, rng);
  const Matrixd theta = lambda_to_theta(hr_to_mu_lambda(gamma, 7).lambda);
  const Matrixd back = theta_to_gamma(theta, 3);
  CHECK((back - gamma).cwiseAbs().maxCoeff() < 1e-10 * gamma.cwiseAbs().maxCoeff());
}
