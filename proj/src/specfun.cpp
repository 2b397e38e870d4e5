#include "ambc/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "ambc/errors.hpp"

namespace ambc::specfun {

namespace {

// ln(1e16): integrand tails below this far from the peak are dropped
constexpr double kTailDrop = 36.841361487904734;

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw DomainError(std::string(what) + " must be finite");
}

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    kron += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  kron *= h;
  gauss *= h;
  if (!std::isfinite(kron)) throw NumericError("integrand is not finite on the integration range", kron);
  return {a, b, kron, std::abs(kron - gauss)};
}

// Integration range for E_G[fn(G)], G ~ Gamma(q, rate q), chosen from the envelope
// (a + b g)^h times the Gamma density. Below q = 1 the variable t = g^q is used, which
// removes the g^(q-1) singularity at the origin.
struct MixtureRange {
  double lo = 0.0;
  double peak = 0.0;
  double hi = 0.0;
  bool t_sub = false;
};

MixtureRange mixture_range(double h, double q, double a, double b, double drop) {
  MixtureRange r;
  r.t_sub = q < 1.0;
  const double ninf = -std::numeric_limits<double>::infinity();
  auto envelope = [=](double x) {
    if (x < 0.0) return ninf;
    const double g = q < 1.0 ? std::pow(x, 1.0 / q) : x;
    const double base = a + b * g;
    const double lb = h == 0.0 ? 0.0 : (base > 0.0 ? h * std::log(base) : ninf);
    if (q < 1.0) return lb - q * g;
    const double lg = (q == 1.0) ? 0.0 : (g > 0.0 ? (q - 1.0) * std::log(g) : ninf);
    return lb + lg - q * g;
  };

  // The envelope is unimodal in g; in t = g^q its mode maps through the same monotone change.
  double g_peak = 0.0;
  if (q < 1.0) {
    g_peak = b > 0.0 ? std::max(h / q - a / b, 0.0) : 0.0;
  } else {
    auto slope = [=](double g) {
      double d = -q;
      if (h != 0.0) d += h * b / (a + b * g);
      if (q != 1.0) d += (q - 1.0) / g;
      return d;
    };
    if (q > 1.0 || slope(0.0) > 0.0) {
      double lo = 0.0, hi = 2.0 + 2.0 * h / q;
      while (slope(hi) > 0.0) hi *= 2.0;
      for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double m = 0.5 * (lo + hi);
        (slope(m) > 0.0 ? lo : hi) = m;
      }
      g_peak = 0.5 * (lo + hi);
    }
  }
  r.peak = q < 1.0 ? std::pow(g_peak, q) : g_peak;

  const double top = envelope(r.peak);
  if (!std::isfinite(top)) throw NumericError("mixture integrand peak is not finite", top);
  const double floor = top - drop;

  if (r.peak > 0.0 && envelope(0.0) < floor) {
    double lo = 0.0, hi = r.peak;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * r.peak; ++i) {
      const double m = 0.5 * (lo + hi);
      (envelope(m) < floor ? lo : hi) = m;
    }
    r.lo = lo;
  }

  double step = std::max(r.peak, 1.0);
  double hi = r.peak + step;
  for (int i = 0; i < 200 && envelope(hi) >= floor; ++i) {
    step *= 2.0;
    hi = r.peak + step;
  }
  double lo = r.peak;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double m = 0.5 * (lo + hi);
    (envelope(m) < floor ? hi : lo) = m;
  }
  r.hi = hi;
  return r;
}

// E_G[fn(G)] integrated over a MixtureRange.
double mixture_expectation(const std::function<double(double)>& fn, double q, const MixtureRange& r,
                           const QuadratureSpec& spec) {
  const double log_norm = r.t_sub ? (q - 1.0) * std::log(q) - std::lgamma(q) : q * std::log(q) - std::lgamma(q);
  auto integrand = [&](double x) {
    if (x <= 0.0 && !(r.t_sub || q == 1.0)) return 0.0;
    const double g = r.t_sub ? std::pow(x, 1.0 / q) : x;
    const double log_dens = r.t_sub ? log_norm - q * g : log_norm + (q == 1.0 ? 0.0 : (q - 1.0) * std::log(g)) - q * g;
    const double v = fn(g);
    return v == 0.0 ? 0.0 : v * std::exp(log_dens);
  };
  double total = 0.0;
  if (r.peak > r.lo) total += integrate(integrand, r.lo, r.peak, spec).value;
  total += integrate(integrand, r.peak, r.hi, spec).value;
  return total;
}

// Rising factorial (q)_k, i.e. Gamma(q + k) / Gamma(q).
double rising(double q, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= q + i;
  return r;
}

void check_moment_args(double p, double q, double signal_power, double noise_var) {
  if (!(p > 0.0) || !std::isfinite(p)) throw DomainError("moment order p must be positive");
  if (!(q > 0.0) || !std::isfinite(q)) throw DomainError("non-Gaussianity q must be positive");
  if (!(signal_power >= 0.0) || !std::isfinite(signal_power)) throw DomainError("signal power must be >= 0");
  if (!(noise_var > 0.0) || !std::isfinite(noise_var)) throw DomainError("noise variance must be positive");
}

}  // namespace

void GammaDistParams::validate() const {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw DomainError("gamma shape must be positive");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("gamma scale must be positive");
}

GammaDistParams GammaDistParams::from_moments(double mean, double variance) {
  if (!(mean > 0.0) || !(variance > 0.0)) throw DomainError("gamma moment match needs positive mean and variance");
  GammaDistParams g{mean * mean / variance, variance / mean};
  g.validate();
  return g;
}

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw DomainError("quadrature tolerances must be positive");
  if (max_subdivisions < 1) throw DomainError("quadrature needs at least one subdivision");
}

double q_function(double x) {
  require_finite(x, "q_function argument");
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

double q_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("q_inverse needs p in (0, 1)");
  return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

namespace {

// Above this shape the incomplete gamma series stop converging; the Wilson-Hilferty
// cube-root normal form is accurate to O(1/shape) there.
constexpr double kLargeShape = 1e10;

double wilson_hilferty_z(double x, const GammaDistParams& g) {
  const double k = g.shape;
  return (std::cbrt(x / (k * g.scale)) - (1.0 - 1.0 / (9.0 * k))) * 3.0 * std::sqrt(k);
}

}  // namespace

double gamma_cdf(double x, const GammaDistParams& params) {
  params.validate();
  if (std::isnan(x) || x < 0.0) throw DomainError("gamma_cdf needs x >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (params.shape > kLargeShape) return q_function(-wilson_hilferty_z(x, params));
  return boost::math::gamma_p(params.shape, x / params.scale);
}

double gamma_sf(double x, const GammaDistParams& params) {
  params.validate();
  if (std::isnan(x) || x < 0.0) throw DomainError("gamma_sf needs x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (params.shape > kLargeShape) return q_function(wilson_hilferty_z(x, params));
  return boost::math::gamma_q(params.shape, x / params.scale);
}

double gamma_cdf_inverse(double p, const GammaDistParams& params) {
  params.validate();
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("gamma_cdf_inverse needs p in [0, 1)");
  if (p == 0.0) return 0.0;

  const double k = params.shape;
  const double theta = params.scale;
  if (k > kLargeShape) {
    const double z = q_inverse(1.0 - p);
    return k * theta * std::pow(std::max(1.0 - 1.0 / (9.0 * k) + z / (3.0 * std::sqrt(k)), 0.0), 3.0);
  }
  // Work in the tail that keeps the residual well conditioned.
  const bool upper = p > 0.5;
  auto residual = [&](double x) { return upper ? (1.0 - p) - gamma_sf(x, params) : gamma_cdf(x, params) - p; };
  auto density = [&](double x) { return boost::math::gamma_p_derivative(k, x / theta) / theta; };

  // Wilson-Hilferty starting point
  const double z = q_inverse(1.0 - p);
  double x = k * theta * std::pow(std::max(1.0 - 1.0 / (9.0 * k) + z / (3.0 * std::sqrt(k)), 1e-3), 3.0);
  if (!(x > 0.0) || !std::isfinite(x)) x = k * theta;

  double lo = 0.0;
  double hi = x;
  while (residual(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericError("gamma_cdf_inverse could not bracket the root", p);
  }
  if (x > hi || x < lo) x = 0.5 * (lo + hi);

  for (int it = 0; it < 300; ++it) {
    const double r = residual(x);
    if (std::abs(r) <= 1e-12) return x;
    (r < 0.0 ? lo : hi) = x;
    const double d = density(x);
    double next = (d > 0.0 && std::isfinite(d)) ? x - r / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return next;
    x = next;
  }
  const double r = residual(x);
  if (std::abs(r) <= 1e-10) return x;
  throw NumericError("gamma_cdf_inverse did not converge", r);
}

double bessel_k(double nu, double x) {
  require_finite(nu, "bessel order");
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("bessel_k needs x > 0");
  return boost::math::cyl_bessel_k(std::abs(nu), x);
}

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b, const QuadratureSpec& spec) {
  spec.validate();
  require_finite(a, "lower limit");
  require_finite(b, "upper limit");
  if (a == b) return {};
  if (a > b) {
    auto r = integrate(f, b, a, spec);
    r.value = -r.value;
    return r;
  }

  std::priority_queue<Segment> heap;
  Segment first = gk15(f, a, b);
  double value = first.value;
  double error = first.error;
  heap.push(first);
  int splits = 0;
  while (error > std::max(spec.abs_tol, spec.rel_tol * std::abs(value))) {
    if (splits >= spec.max_subdivisions)
      throw NumericError("adaptive quadrature did not reach tolerance", error);
    Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Segment left = gk15(f, worst.a, mid);
    Segment right = gk15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++splits;
  }
  // Re-sum to shed the drift from incremental updates.
  double v = 0.0, e = 0.0;
  while (!heap.empty()) {
    v += heap.top().value;
    e += heap.top().error;
    heap.pop();
  }
  return {v, e, splits};
}

double mcleish_noise_moment(double p, double q, double noise_var) {
  check_moment_args(p, q, 0.0, noise_var);
  const double h = 0.5 * p;
  const double log_ratio = std::lgamma(h + q) - std::lgamma(q) - h * std::log(q);
  return std::exp(log_ratio + std::lgamma(h + 1.0) + h * std::log(noise_var));
}

double mcleish_abs_moment_even(int p, double q, double signal_power, double noise_var) {
  check_moment_args(p, q, signal_power, noise_var);
  if (p % 2 != 0) throw DomainError("even-order closed form needs an even p");
  const int m = p / 2;
  double sum = 0.0;
  double binom = 1.0;
  for (int k = 0; k <= m; ++k) {
    sum += binom * std::pow(signal_power, m - k) * std::pow(noise_var, k) * rising(q, k) / std::pow(q, k);
    binom = binom * (m - k) / (k + 1);
  }
  return std::tgamma(m + 1.0) * sum;
}

double mcleish_abs_moment_quadrature(double p, double q, double signal_power, double noise_var,
                                     const QuadratureSpec& spec) {
  check_moment_args(p, q, signal_power, noise_var);
  spec.validate();
  const double h = 0.5 * p;
  const double c = signal_power + noise_var;
  const double a = signal_power / c;
  const double b = noise_var / c;
  const MixtureRange range = mixture_range(h, q, a, b, kTailDrop);
  const double e = mixture_expectation([=](double g) { return std::pow(a + b * g, h); }, q, range, spec);
  return std::tgamma(h + 1.0) * std::pow(c, h) * e;
}

double mcleish_abs_moment(double p, double q, double signal_power, double noise_var, const QuadratureSpec& spec) {
  check_moment_args(p, q, signal_power, noise_var);
  const double half = 0.5 * p;
  if (half == std::floor(half) && half <= 64.0) return mcleish_abs_moment_even(static_cast<int>(p), q, signal_power, noise_var);
  if (signal_power == 0.0) return mcleish_noise_moment(p, q, noise_var);
  return mcleish_abs_moment_quadrature(p, q, signal_power, noise_var, spec);
}

double mcleish_pdf(std::complex<double> w, double noise_var, double q) {
  if (!(noise_var > 0.0)) throw DomainError("noise variance must be positive");
  if (!(q > 0.0) || !std::isfinite(q)) throw DomainError("non-Gaussianity q must be positive");
  require_finite(w.real(), "noise sample");
  require_finite(w.imag(), "noise sample");
  const double r = std::abs(w);
  const double sigma = std::sqrt(noise_var);

  if (r == 0.0) {
    if (q <= 1.0) return std::numeric_limits<double>::infinity();
    return q / (std::numbers::pi * noise_var * (q - 1.0));
  }

  if (q <= 100.0) {
    const double x = 2.0 * std::sqrt(q) * r / sigma;
    const double k = boost::math::cyl_bessel_k(std::abs(q - 1.0), x);
    const double log_pref = std::log(2.0) + 0.5 * (q + 1.0) * std::log(q) + (q - 1.0) * std::log(r) -
                            std::log(std::numbers::pi) - (q + 1.0) * std::log(sigma) - std::lgamma(q);
    const double v = std::exp(log_pref) * k;
    if (std::isfinite(v) && v > 0.0) return v;
  }

  // Gamma mixture of CN(0, g noise_var) densities
  const double r2 = r * r / noise_var;
  const MixtureRange range = mixture_range(0.0, q, 1.0, 0.0, kTailDrop);
  const double e = mixture_expectation([=](double g) { return std::exp(-r2 / g) / g; }, q, range, {});
  return e / (std::numbers::pi * noise_var);
}

namespace {

// Mean and variance of |x + w|^p / sigma^p for w ~ CN(0, sigma^2) and lambda = |x|^2 / sigma^2.
AbsMoments rice_normalized(double p, double lambda) {
  const double a = 0.5 * p;
  if (lambda == 0.0) {
    const double m = std::tgamma(1.0 + a);
    return {m, std::tgamma(1.0 + p) - m * m};
  }
  if (lambda <= 40.0) {
    // Kummer-transformed series, all terms positive.
    auto series = [lambda](double aa) {
      double term = 1.0, sum = 1.0;
      for (int k = 0; k < 2000; ++k) {
        term *= (1.0 + aa + k) * lambda / ((k + 1.0) * (k + 1.0));
        sum += term;
        if (term < 1e-17 * sum) break;
      }
      return std::tgamma(1.0 + aa) * std::exp(-lambda) * sum;
    };
    const double m1 = series(a);
    const double m2 = series(p);
    return {m1, std::max(m2 - m1 * m1, 0.0)};
  }
  // Large-lambda expansion lambda^(p/2) sum_s ((-a)_s)^2 / (s! lambda^s), tails summed apart
  // from the leading 1 so the variance does not cancel.
  auto tail = [lambda](double aa) {
    double c = 1.0, sum = 0.0, prev = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 200; ++s) {
      c *= (s - aa) * (s - aa) / ((s + 1.0) * lambda);
      if (std::abs(c) > prev || c == 0.0) break;
      sum += c;
      prev = std::abs(c);
      if (std::abs(c) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
  };
  const double b1 = tail(a);
  const double b2 = tail(p);
  const double scale = std::pow(lambda, a);
  return {scale * (1.0 + b1), scale * scale * std::max(b2 - 2.0 * b1 - b1 * b1, 0.0)};
}

void check_rice_args(double p, double amplitude_sq, double noise_var) {
  if (!(p > 0.0) || !std::isfinite(p)) throw DomainError("moment order p must be positive");
  if (!(amplitude_sq >= 0.0) || !std::isfinite(amplitude_sq)) throw DomainError("signal power must be >= 0");
  if (!(noise_var > 0.0) || !std::isfinite(noise_var)) throw DomainError("noise variance must be positive");
}

}  // namespace

AbsMoments rice_abs_moments(double p, double amplitude_sq, double noise_var) {
  check_rice_args(p, amplitude_sq, noise_var);
  const AbsMoments m = rice_normalized(p, amplitude_sq / noise_var);
  const double s = std::pow(noise_var, 0.5 * p);
  return {m.mean * s, m.variance * s * s};
}

AbsMoments mcleish_rice_abs_moments(double p, double q, double amplitude_sq, double noise_var,
                                    const QuadratureSpec& spec) {
  check_rice_args(p, amplitude_sq, noise_var);
  if (!(q > 0.0) || !std::isfinite(q)) throw DomainError("non-Gaussianity q must be positive");
  spec.validate();
  // Conditional on G = g the noise is CN(0, g noise_var); work in units of noise_var.
  const double lambda = amplitude_sq / noise_var;
  const double a = lambda / (lambda + 1.0);
  const double b = 1.0 / (lambda + 1.0);
  const MixtureRange range = mixture_range(0.5 * p, q, a, b, kTailDrop + 8.0);
  auto cond = [=](double g) {
    if (g <= 0.0) return AbsMoments{std::pow(lambda, 0.5 * p), 0.0};
    const AbsMoments m = rice_normalized(p, lambda / g);
    const double s = std::pow(g, 0.5 * p);
    return AbsMoments{m.mean * s, m.variance * s * s};
  };
  const double mean = mixture_expectation([&](double g) { return cond(g).mean; }, q, range, spec);
  const double within = mixture_expectation([&](double g) { return cond(g).variance; }, q, range, spec);
  const double between = mixture_expectation(
      [&](double g) {
        const double d = cond(g).mean - mean;
        return d * d;
      },
      q, range, spec);
  const double s = std::pow(noise_var, 0.5 * p);
  return {mean * s, (within + between) * s * s};
}

double rice_raw_moment(double r, double amplitude_sq, double noise_var) {
  check_rice_args(r, amplitude_sq, noise_var);
  return rice_normalized(r, amplitude_sq / noise_var).mean * std::pow(noise_var, 0.5 * r);
}

double mcleish_rice_raw_moment(double r, double q, double amplitude_sq, double noise_var, const QuadratureSpec& spec) {
  check_rice_args(r, amplitude_sq, noise_var);
  if (!(q > 0.0) || !std::isfinite(q)) throw DomainError("non-Gaussianity q must be positive");
  spec.validate();
  const double lambda = amplitude_sq / noise_var;
  const double a = lambda / (lambda + 1.0);
  const double b = 1.0 / (lambda + 1.0);
  const MixtureRange range = mixture_range(0.5 * r, q, a, b, kTailDrop + 8.0);
  const double mean = mixture_expectation(
      [=](double g) {
        if (g <= 0.0) return std::pow(lambda, 0.5 * r);
        return rice_normalized(r, lambda / g).mean * std::pow(g, 0.5 * r);
      },
      q, range, spec);
  return mean * std::pow(noise_var, 0.5 * r);
}

}  // namespace ambc::specfun
