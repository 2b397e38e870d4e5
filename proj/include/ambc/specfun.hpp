#pragma once

// Special functions and numerical kernels: Gaussian tail, Gamma distribution,
// modified Bessel K, adaptive quadrature and McLeish absolute moments.
//
// Everything here is a pure function of its arguments.

#include <complex>
#include <functional>

namespace ambc::specfun {

struct GammaDistParams {
  double shape = 1.0;  // k
  double scale = 1.0;  // theta

  void validate() const;
  double mean() const { return shape * scale; }
  double variance() const { return shape * scale * scale; }

  /// Moment match: shape = mean^2 / var, scale = var / mean.
  static GammaDistParams from_moments(double mean, double variance);
};

struct QuadratureSpec {
  double abs_tol = 1e-15;
  double rel_tol = 1e-9;
  int max_subdivisions = 400;

  void validate() const;
};

struct AbsMoments {
  double mean = 0.0;
  double variance = 0.0;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int subdivisions = 0;
};

/// Upper tail of the standard normal, Q(x) = P(Z > x).
double q_function(double x);

/// Inverse of q_function on (0, 1).
double q_inverse(double p);

double gamma_cdf(double x, const GammaDistParams& params);

/// Survival function 1 - gamma_cdf, computed without cancellation.
double gamma_sf(double x, const GammaDistParams& params);

/// Smallest x >= 0 with gamma_cdf(x) = p, for p in [0, 1).
double gamma_cdf_inverse(double p, const GammaDistParams& params);

/// Modified Bessel function of the second kind, K_nu(x), x > 0.
double bessel_k(double nu, double x);

/// Adaptive Gauss-Kronrod (7/15) integration of f over the finite interval [a, b].
/// Throws NumericError when the error estimate stays above tolerance after
/// `max_subdivisions` bisections.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureSpec& spec = {});

/// E|x + w|^p where x ~ CN(0, signal_power) and w is McLeish noise with variance
/// noise_var and non-Gaussianity q (w = sqrt(G) C, G ~ Gamma(q, rate q), C ~ CN(0, noise_var)).
///
/// Even integer p is evaluated with the binomial closed form, signal_power == 0 with the
/// noise-only closed form, everything else by quadrature over the Gamma mixing density.
double mcleish_abs_moment(double p, double q, double signal_power, double noise_var,
                          const QuadratureSpec& spec = {});

/// The quadrature route alone, Gamma(p/2 + 1) * E_G[(signal_power + G noise_var)^(p/2)].
double mcleish_abs_moment_quadrature(double p, double q, double signal_power, double noise_var,
                                     const QuadratureSpec& spec = {});

/// Binomial closed form; p must be a positive even integer.
double mcleish_abs_moment_even(int p, double q, double signal_power, double noise_var);

/// Noise-only closed form Gamma(p/2+q) Gamma(p/2+1) / (Gamma(q) q^(p/2)) sigma^p.
double mcleish_noise_moment(double p, double q, double noise_var);

/// Density of circularly symmetric McLeish noise on the complex plane.
/// Integrates to one over C and has E|w|^2 = noise_var.
double mcleish_pdf(std::complex<double> w, double noise_var, double q);

/// Mean and variance of |x + w|^p for a fixed x with |x|^2 = amplitude_sq and w ~ CN(0, noise_var).
AbsMoments rice_abs_moments(double p, double amplitude_sq, double noise_var);

/// Same for McLeish noise, integrated over the Gamma mixing variable.
AbsMoments mcleish_rice_abs_moments(double p, double q, double amplitude_sq, double noise_var,
                                    const QuadratureSpec& spec = {});

/// E|x + w|^r alone, w ~ CN(0, noise_var).
double rice_raw_moment(double r, double amplitude_sq, double noise_var);

/// E|x + w|^r alone, w McLeish.
double mcleish_rice_raw_moment(double r, double q, double amplitude_sq, double noise_var,
                               const QuadratureSpec& spec = {});

}  // namespace ambc::specfun
