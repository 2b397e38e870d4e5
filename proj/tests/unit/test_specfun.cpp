#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>

#include "ambc/errors.hpp"
#include "ambc/specfun.hpp"
#include "oracles.hpp"

using namespace ambc;
using namespace ambc::specfun;

namespace {

// |x + sqrt(G) C|^p sampled with the standard library generators.
oracle::Stats mcleish_abs_mc(double p, double q, double signal_power, double noise_var, int draws, unsigned seed,
                             bool fixed_signal = false) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::gamma_distribution<double> gd(q, 1.0 / q);
  oracle::Stats st;
  const double xs = std::sqrt(signal_power / 2), ws = std::sqrt(noise_var / 2);
  for (int i = 0; i < draws; ++i) {
    std::complex<double> x = fixed_signal ? std::complex<double>(std::sqrt(signal_power), 0.0)
                                          : std::complex<double>(xs * nd(gen), xs * nd(gen));
    const double g = std::sqrt(gd(gen));
    const std::complex<double> w(ws * g * nd(gen), ws * g * nd(gen));
    st.add(std::pow(std::abs(x + w), p));
  }
  return st;
}

oracle::Stats rice_abs_mc(double p, double amplitude_sq, double noise_var, int draws, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  oracle::Stats st;
  const double ws = std::sqrt(noise_var / 2);
  for (int i = 0; i < draws; ++i) {
    const std::complex<double> y(std::sqrt(amplitude_sq) + ws * nd(gen), ws * nd(gen));
    st.add(std::pow(std::abs(y), p));
  }
  return st;
}

}  // namespace

TEST_SUITE("specfun") {

TEST_CASE("q_function values") {
  CHECK(q_function(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  const double ref = oracle::normal_tail(1.2816);
  CHECK(std::abs(ref - 0.10) < 1e-4);
  CHECK(q_function(1.2816) == doctest::Approx(ref).epsilon(1e-10));
  CHECK(std::abs(q_function(1.2816) - 0.10) < 1e-4);
  // Q(x) < phi(x) / x
  CHECK(q_function(8.0) < oracle::normal_pdf(8.0) / 8.0);
  CHECK(q_function(8.0) < 1e-15);
  CHECK(q_function(8.0) > 0.0);
  CHECK_THROWS_AS(q_function(std::nan("")), DomainError);
  CHECK_THROWS_AS(q_function(std::numeric_limits<double>::infinity()), DomainError);
}

TEST_CASE("q_function is strictly decreasing inside (0, 1)") {
  double prev = 1.0;
  for (double x = -8.0; x <= 8.0; x += 0.05) {
    const double v = q_function(x);
    CHECK(v < prev);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    prev = v;
  }
}

TEST_CASE("q_inverse values") {
  CHECK(q_inverse(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  const double ref = oracle::bisect([](double x) { return oracle::normal_tail(x) - 0.05; }, 0.0, 4.0, 60);
  CHECK(std::abs(ref - 1.6449) < 1e-4);
  CHECK(std::abs(q_inverse(0.05) - 1.6449) < 1e-4);
  CHECK(q_inverse(0.05) == doctest::Approx(ref).epsilon(1e-9));
  CHECK(std::abs(q_function(q_inverse(0.01)) - 0.01) < 1e-10);
  CHECK_THROWS_AS(q_inverse(0.0), DomainError);
  CHECK_THROWS_AS(q_inverse(1.0), DomainError);
  CHECK_THROWS_AS(q_inverse(-0.2), DomainError);
}

TEST_CASE("q_function and q_inverse are an inverse pair") {
  for (double lp = -6.0; lp <= std::log10(1 - 1e-6); lp += 0.01) {
    const double p = std::pow(10.0, lp);
    CHECK(std::abs(q_function(q_inverse(p)) - p) < 1e-10);
    const double pc = 1.0 - p;
    if (pc >= 1e-6) CHECK(std::abs(q_function(q_inverse(pc)) - pc) < 1e-10);
  }
}

TEST_CASE("gamma_cdf values") {
  CHECK(gamma_cdf(0.0, {256, 0.37}) == 0.0);
  CHECK(gamma_cdf(1.0, {1, 1}) == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-14));
  const double mid = gamma_cdf(100.0, {50, 2});
  CHECK(mid > 0.4);
  CHECK(mid < 0.6);
  CHECK(mid == doctest::Approx(oracle::gamma_p_series(50, 50)).epsilon(1e-12));
  for (double a : {0.3, 1.7, 256.0})
    for (double x : {0.01, 0.9, 3.0, 200.0})
      CHECK(gamma_cdf(x, {a, 1.0}) == doctest::Approx(oracle::gamma_p_series(a, x)).epsilon(1e-11));
  CHECK_THROWS_AS(gamma_cdf(-1e-9, {2, 1}), DomainError);
  CHECK_THROWS_AS(gamma_cdf(1.0, {0, 1}), DomainError);
  CHECK_THROWS_AS(gamma_cdf(1.0, {1, -1}), DomainError);
}

TEST_CASE("gamma_cdf is monotone and tends to one") {
  const GammaDistParams g{256, 0.01};
  double prev = 0.0;
  for (double x = 0.0; x < 6.0; x += 0.01) {
    const double v = gamma_cdf(x, g);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(gamma_cdf(1e3, g) == 1.0);
  // very large shapes
  const GammaDistParams big{1e12, 1e-12};
  CHECK(gamma_cdf(1.0, big) == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(gamma_sf(1.0 + 1.645e-6, big) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(gamma_cdf(gamma_cdf_inverse(0.95, big), big) == doctest::Approx(0.95).epsilon(1e-10));
  CHECK(gamma_sf(1e3, g) >= 0.0);
}

TEST_CASE("gamma_cdf_inverse values") {
  CHECK(gamma_cdf_inverse(0.0, {3, 2}) == 0.0);
  CHECK(std::abs(gamma_cdf_inverse(1 - std::exp(-1.0), {1, 1}) - 1.0) < 1e-8);
  const GammaDistParams g{256, 0.01};
  CHECK(std::abs(gamma_cdf(gamma_cdf_inverse(0.95, g), g) - 0.95) < 1e-10);
  CHECK_THROWS_AS(gamma_cdf_inverse(1.0, g), DomainError);
  CHECK_THROWS_AS(gamma_cdf_inverse(-0.1, g), DomainError);
}

TEST_CASE("gamma_cdf and gamma_cdf_inverse are an inverse pair") {
  for (GammaDistParams g : {GammaDistParams{0.4, 3.0}, GammaDistParams{1, 1}, GammaDistParams{256, 2.0 / 512},
                            GammaDistParams{2000, 1e-3}, GammaDistParams{3e10, 1.0}}) {
    for (double lp = -6.0; lp < 0.0; lp += 0.05) {
      const double p = std::pow(10.0, lp);
      for (double target : {p, 1.0 - p}) {
        if (target < 1e-6 || target > 1 - 1e-6) continue;
        CHECK(std::abs(gamma_cdf(gamma_cdf_inverse(target, g), g) - target) < 1e-10);
      }
    }
  }
}

TEST_CASE("GammaDistParams moment matching") {
  const auto g = GammaDistParams::from_moments(3.0, 4.5);
  CHECK(g.shape == doctest::Approx(2.0));
  CHECK(g.scale == doctest::Approx(1.5));
  CHECK(g.mean() == doctest::Approx(3.0));
  CHECK(g.variance() == doctest::Approx(4.5));
  CHECK_THROWS_AS(GammaDistParams::from_moments(1.0, 0.0), DomainError);
}

TEST_CASE("bessel_k values") {
  const double half = std::sqrt(std::numbers::pi / 2) * std::exp(-1.0);
  CHECK(bessel_k(0.5, 1.0) == doctest::Approx(half).epsilon(1e-13));
  CHECK(bessel_k(-0.5, 1.0) == bessel_k(0.5, 1.0));
  const double ref = oracle::bessel_k_integral(0.0, 2.0);
  CHECK(std::abs(ref - 0.11389) < 1e-5);
  CHECK(std::abs(bessel_k(0.0, 2.0) - 0.11389) < 1e-5);
  for (double nu : {0.0, 0.3, 1.0, 2.5, 7.0})
    for (double x : {0.05, 1.0, 4.0, 30.0})
      CHECK(bessel_k(nu, x) == doctest::Approx(oracle::bessel_k_integral(nu, x)).epsilon(1e-8));
  CHECK_THROWS_AS(bessel_k(0.5, 0.0), DomainError);
  CHECK_THROWS_AS(bessel_k(0.5, -1.0), DomainError);
}

TEST_CASE("integrate") {
  auto r = integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-12));
  r = integrate([](double x) { return std::exp(-x * x); }, -10.0, 10.0);
  CHECK(r.value == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));

  QuadratureSpec tight;
  tight.max_subdivisions = 2;
  tight.rel_tol = 1e-14;
  tight.abs_tol = 1e-300;
  try {
    integrate([](double x) { return std::sin(1.0 / x); }, 1e-4, 1.0, tight);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(e.residual() > 0.0);
  }
  QuadratureSpec bad;
  bad.rel_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("mcleish_abs_moment values") {
  CHECK(mcleish_abs_moment(2, 1, 3, 0.5) == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(mcleish_abs_moment(2, 1, 0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  // 10^7 draws of the Gamma mixture
  const auto mc = mcleish_abs_mc(1.3, 1, 2, 1, 10'000'000, 7);
  const double v = mcleish_abs_moment(1.3, 1, 2, 1);
  CHECK(std::abs(v - mc.mean) < 3 * mc.se());
  CHECK_THROWS_AS(mcleish_abs_moment(0.0, 1, 1, 1), DomainError);
  CHECK_THROWS_AS(mcleish_abs_moment(1.0, 0.0, 1, 1), DomainError);
  CHECK_THROWS_AS(mcleish_abs_moment(1.0, 1, 1, 0.0), DomainError);
}

TEST_CASE("mcleish second moment is S + sigma^2 for every q") {
  for (double q : {0.5, 1.0, 2.0, 10.0, 1e4}) {
    CHECK(mcleish_abs_moment(2, q, 1.7, 0.3) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(mcleish_abs_moment_quadrature(2, q, 1.7, 0.3) == doctest::Approx(2.0).epsilon(1e-8));
  }
}

TEST_CASE("mcleish noise moment tends to the Gaussian value") {
  for (double p : {0.5, 1.0, 1.3, 2.5, 3.0}) {
    const double gauss = std::tgamma(p / 2 + 1) * std::pow(0.8, p / 2);
    CHECK(mcleish_abs_moment(p, 1e4, 0, 0.8) == doctest::Approx(gauss).epsilon(5e-3));
  }
}

TEST_CASE("quadrature agrees with the even-p closed form") {
  for (int p : {2, 4, 6})
    for (double q : {0.5, 1.0, 2.0, 10.0, 1e4})
      for (double s : {0.0, 0.2, 3.0}) {
        const double closed = mcleish_abs_moment_even(p, q, s, 0.7);
        const double quad = mcleish_abs_moment_quadrature(p, q, s, 0.7);
        CHECK(std::abs(quad - closed) <= 1e-8 * closed);
      }
  CHECK(mcleish_noise_moment(4, 1, 1) == doctest::Approx(mcleish_abs_moment_even(4, 1, 0, 1)));
}

TEST_CASE("mcleish_pdf is a density with second moment sigma^2") {
  for (double q : {0.5, 1.0, 2.0, 150.0}) {
    const double var = 0.6;
    // radial integrals in u = log r
    auto mass = oracle::simpson(
        [&](double u) {
          const double r = std::exp(u);
          return 2 * std::numbers::pi * r * r * mcleish_pdf({r, 0.0}, var, q);
        },
        -30.0, 3.5, 40000);
    auto second = oracle::simpson(
        [&](double u) {
          const double r = std::exp(u);
          return 2 * std::numbers::pi * r * r * r * r * mcleish_pdf({0.0, r}, var, q);
        },
        -30.0, 3.5, 40000);
    CAPTURE(q);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(second == doctest::Approx(var).epsilon(1e-6));
  }
  CHECK(std::isinf(mcleish_pdf({0.0, 0.0}, 1.0, 0.5)));
  CHECK(mcleish_pdf({0.0, 0.0}, 1.0, 2.0) == doctest::Approx(2.0 / std::numbers::pi));
}

TEST_CASE("noncentral moments against Monte Carlo") {
  for (double lambda : {0.0, 0.5, 4.0, 30.0, 200.0})
    for (double p : {0.5, 1.3, 3.0}) {
      CAPTURE(lambda);
      CAPTURE(p);
      const auto m = rice_abs_moments(p, lambda * 0.5, 0.5);
      const auto mc = rice_abs_mc(p, lambda * 0.5, 0.5, 400000, 11);
      CHECK(std::abs(m.mean - mc.mean) < 4 * mc.se());
      CHECK(m.variance == doctest::Approx(mc.variance()).epsilon(0.02));
    }
  const auto two = rice_abs_moments(2, 3.0, 0.5);
  CHECK(two.mean == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(two.variance == doctest::Approx(0.25 + 2 * 3.0 * 0.5).epsilon(1e-10));
  // continuity across the series / asymptotic switch
  const auto below = rice_abs_moments(1.3, 40.0 - 1e-9, 1.0);
  const auto above = rice_abs_moments(1.3, 40.0 + 1e-9, 1.0);
  CHECK(below.mean == doctest::Approx(above.mean).epsilon(1e-9));
  CHECK(below.variance == doctest::Approx(above.variance).epsilon(1e-7));

  for (double q : {0.5, 1.0, 2.0}) {
    CAPTURE(q);
    const auto m = mcleish_rice_abs_moments(1.3, q, 2.0, 1.0);
    const auto mc = mcleish_abs_mc(1.3, q, 2.0, 1.0, 1'000'000, 5, true);
    CHECK(std::abs(m.mean - mc.mean) < 3 * mc.se());
    CHECK(m.variance == doctest::Approx(mc.variance()).epsilon(0.03));
  }
}

}  // TEST_SUITE
