#include <doctest.h>

#include <cmath>
#include <random>

#include "ambc/detectors.hpp"
#include "ambc/errors.hpp"
#include "ambc/specfun.hpp"
#include "oracles.hpp"

using namespace ambc;
using namespace ambc::detect;
using sysmodel::cplx;
using sysmodel::SampleBlock;

namespace {

SampleBlock make_block(int m, int n, std::vector<cplx> y) {
  SampleBlock b;
  b.m = m;
  b.n = n;
  b.y = std::move(y);
  b.w.assign(b.y.size(), cplx{});
  b.s.assign(n, cplx{});
  return b;
}

// Single antenna, constant signal of power ps, known channel powers.
MomentInputs inputs(double u0, double u1, int n = 512, double ps = 1.0, double noise = 1.0,
                    bool gaussian_signal = false, int antennas = 1) {
  sysmodel::ScenarioParams p;
  p.n = n;
  p.ps_watts = ps;
  MomentInputs in;
  in.stats = sysmodel::signal_stats(p);
  in.sample_power = ps;
  in.channel_power[0].assign(antennas, u0);
  in.channel_power[1].assign(antennas, u1);
  in.noise.variance = noise;
  in.signal_gaussian = gaussian_signal;
  return in;
}

DetectorConfig ted(double pf = 0.05) {
  DetectorConfig c;
  c.kind = DetectorKind::Ted;
  c.target_pf = pf;
  return c;
}

DetectorConfig ied(double p, double pf = 0.05) {
  DetectorConfig c;
  c.kind = DetectorKind::Ied;
  c.p = p;
  c.target_pf = pf;
  return c;
}

}  // namespace

TEST_SUITE("detectors") {

TEST_CASE("statistic values") {
  const channel::NoiseModel unit{};
  CHECK(ted_statistic(make_block(1, 4, std::vector<cplx>(4)), unit) == 0.0);
  CHECK(ted_statistic(make_block(1, 1, {{2, 0}}), unit) == 4.0);
  CHECK(ied_statistic(make_block(1, 1, {{3, 4}}), 1.0, unit) == doctest::Approx(5.0));
  CHECK_THROWS_AS(ied_statistic(make_block(1, 1, {{3, 4}}), 0.0, unit), DomainError);
  CHECK(jced_statistic(make_block(1, 3, std::vector<cplx>(3)), {0.5, 0.5}) == 0.0);
  CHECK_THROWS_AS(jced_statistic(make_block(1, 1, {{1, 0}}), {0.5, 0.5}), DomainError);

  // M = 1, sigma^2 = 2: (1/N) sum |y|^2 / sigma^2
  const channel::NoiseModel two{channel::NoiseFamily::Cscg, 2.0, 1.0};
  const auto b = make_block(1, 3, {{1, 1}, {2, 0}, {0, -1}});
  CHECK(ted_statistic(b, two) == doctest::Approx((2.0 + 4.0 + 1.0) / 3 / 2));
  CHECK(ied_statistic(b, 2.0, two) == doctest::Approx(ted_statistic(b, two)));

  // Z1 = sum |y|^2, Z2 = sum y(n+1) y*(n)
  const auto z = jced_components(b);
  const cplx z2 = cplx(2, 0) * std::conj(cplx(1, 1)) + cplx(0, -1) * std::conj(cplx(2, 0));
  CHECK(z[0] == doctest::Approx(7.0));
  CHECK(z[1] == doctest::Approx(z2.real()));
  CHECK(jced_statistic(b, {1.0, 0.0}) == doctest::Approx(7.0));
  CHECK(jced_statistic(b, {0.25, 0.75}) == doctest::Approx(0.25 * 7.0 + 0.75 * z2.real()));

  // multi-antenna TED is a plain sum
  const auto b2 = make_block(2, 2, {{1, 0}, {0, 2}, {1, 1}, {3, 0}});
  CHECK(ted_statistic(b2, two) == doctest::Approx(1 + 4 + 2 + 9));
  CHECK(ied_statistic(b2, 2.0, two) == doctest::Approx((1 + 4 + 2 + 9) / 2.0));
}

TEST_CASE("TED and IED(2) make the same decisions") {
  for (int m : {1, 3}) {
    auto in = inputs(0.0, 0.01, 64, 1.0, 0.5, false, m);
    const auto mt = ted_moments(in);
    const auto mi = ied_moments(2.0, in);
    const double tt = threshold(ted(), mt), ti = threshold(ied(2.0), mi);
    std::mt19937_64 gen(3);
    std::normal_distribution<double> nd;
    int agree = 0;
    const int blocks = 2000;
    for (int t = 0; t < blocks; ++t) {
      std::vector<cplx> y(static_cast<std::size_t>(m) * 64);
      for (auto& v : y) v = cplx(0.5 * nd(gen) + 0.1, 0.5 * nd(gen));
      const auto b = make_block(m, 64, y);
      const bool dt = ted_statistic(b, in.noise) > tt;
      const bool di = ied_statistic(b, 2.0, in.noise) > ti;
      agree += dt == di;
    }
    CHECK(agree == blocks);
  }
}

TEST_CASE("symmetric hypotheses give identical moments") {
  const auto in = inputs(0.3, 0.3, 128, 1.0, 0.5);
  for (const auto& m : {ted_moments(in), ied_moments(1.3, in), jced_moments(in, {0.4, 0.6})}) {
    CHECK(m.mean[0] == m.mean[1]);
    CHECK(m.var[0] == m.var[1]);
  }
}

TEST_CASE("moment identities") {
  // gamma = 0, p = 2, Gaussian noise: normalized mean is 1
  for (auto conv : {MomentConvention::Exact, MomentConvention::Printed}) {
    auto in = inputs(0.0, 0.0);
    in.convention = conv;
    CHECK(ied_moments(2.0, in).mean[0] == doctest::Approx(1.0).epsilon(1e-12));
  }
  // printed Gamma parameters at p = 2: k = N/2, theta = 2(1 + gamma)/N
  auto pin = inputs(0.2, 0.7, 512, 1.0, 0.5);
  pin.convention = MomentConvention::Printed;
  const auto pm = ted_moments(pin);
  for (int j = 0; j < 2; ++j) {
    const double gamma = pin.channel_power[j][0] * 1.0 / 0.5;
    CHECK(pm.gamma->at(j).shape == doctest::Approx(256.0).epsilon(1e-12));
    CHECK(pm.gamma->at(j).scale == doctest::Approx(2 * (1 + gamma) / 512).epsilon(1e-12));
  }
  // McLeish p = 2: per-sample mean of |y|^2 is |h|^2 P_s + sigma^2 for any q
  for (double q : {0.5, 1.0, 3.0}) {
    auto in = inputs(0.2, 0.9, 64, 0.5, 0.3);
    in.noise = {channel::NoiseFamily::McLeish, 0.3, q};
    const auto m = ied_moments(2.0, in);
    CHECK(m.mean[0] == doctest::Approx(0.2 * 0.5 + 0.3).epsilon(1e-9));
    CHECK(m.mean[1] == doctest::Approx(0.9 * 0.5 + 0.3).epsilon(1e-9));
    CHECK(m.form == ThresholdForm::GammaInverse);
    in.convention = MomentConvention::Printed;
    CHECK(ied_moments(2.0, in).form == ThresholdForm::GaussianClt);
  }
}

TEST_CASE("three-moment gamma fit") {
  // noise-only TED under Gaussian noise is exactly Gamma(N, 1/N): no shift
  const auto m = ted_moments(inputs(0.0, 0.3, 128));
  REQUIRE(m.form == ThresholdForm::GammaInverse);
  CHECK(m.gamma->at(0).shape == doctest::Approx(128.0).epsilon(1e-9));
  CHECK(m.gamma->at(0).scale == doctest::Approx(1.0 / 128).epsilon(1e-9));
  CHECK(std::abs(m.shift[0]) < 1e-9);
  // the fit reproduces mean and variance for any exponent
  for (double p : {0.5, 1.0, 3.0}) {
    auto in = inputs(0.1, 0.4, 64);
    in.noise = {channel::NoiseFamily::McLeish, 1.0, 1.0};
    const auto g = ied_moments(p, in);
    for (int j = 0; j < 2; ++j) {
      CHECK(g.shift[j] + g.gamma->at(j).mean() == doctest::Approx(g.mean[j]).epsilon(1e-9));
      CHECK(g.gamma->at(j).variance() == doctest::Approx(g.var[j]).epsilon(1e-9));
    }
  }
}

TEST_CASE("three-moment threshold against simulated statistics") {
  // IED p = 3 under Laplacian-like noise, H0 = noise only, N = 512
  auto in = inputs(0.0, 0.0, 512);
  in.noise = {channel::NoiseFamily::McLeish, 1.0, 1.0};
  const auto cfg = ied(3.0, 0.01);
  const double tau = threshold(cfg, ied_moments(3.0, in));
  std::mt19937_64 gen(17);
  std::gamma_distribution<double> mix(1.0, 1.0);
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  const int trials = 100000;
  int above = 0;
  for (int t = 0; t < trials; ++t) {
    double sum = 0.0;
    for (int k = 0; k < 512; ++k) {
      const double g = mix(gen);
      const double re = nd(gen), im = nd(gen);
      sum += std::pow(g * (re * re + im * im), 1.5);
    }
    above += sum / 512 > tau;
  }
  const double pf = static_cast<double>(above) / trials;
  CAPTURE(pf);
  CHECK(std::abs(pf - 0.01) < 3 * oracle::binomial_se(0.01, trials));
}

TEST_CASE("McLeish energy variance tends to the Gaussian value") {
  auto in = inputs(0.4, 1.1, 64, 1.0, 0.5);
  const auto g = jced_joint_moments(in);
  in.noise = {channel::NoiseFamily::McLeish, 0.5, 1e4};
  const auto m = jced_joint_moments(in);
  for (int j = 0; j < 2; ++j) {
    const double gamma = in.channel_power[j][0] * in.stats.energy / 0.5;
    CHECK(m.var_z1[j] == doctest::Approx((64 + 2 * gamma) * 0.25).epsilon(1e-3));
    CHECK(g.var_z1[j] == doctest::Approx((64 + 2 * gamma) * 0.25).epsilon(1e-12));
  }
}

TEST_CASE("thresholds") {
  auto in = inputs(0.0, 0.01, 512);
  DetectorConfig j;
  j.kind = DetectorKind::Jced;
  j.target_pf = 0.5;
  const auto jm = jced_moments(in, j.weights);
  CHECK(threshold(j, jm) == jm.mean[0]);

  // round trip through the Gamma quantile
  const auto m = ted_moments(in);
  const double tau = threshold(ted(0.05), m);
  CHECK(specfun::gamma_sf(tau, m.gamma->at(0)) == doctest::Approx(0.05).epsilon(1e-9));

  DetectorConfig bad = ted(0.0);
  CHECK_THROWS_AS(threshold(bad, m), DomainError);
}

TEST_CASE("empirical false-alarm rate at the threshold") {
  // H0: y = h0 + w, h0 = 0.1 fixed, sigma^2 = 1, N = 512, 10^4 trials
  const double u0 = 0.01;
  const auto in = inputs(u0, 0.05, 512, 1.0, 1.0);
  std::mt19937_64 gen(17);
  std::normal_distribution<double> nd;
  const double sd = std::sqrt(0.5);
  for (const auto& cfg : {ted(), ied(1.0), ied(3.0)}) {
    const auto m = moments(cfg, in);
    const double tau = threshold(cfg, m);
    int alarms = 0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
      std::vector<cplx> y(512);
      for (auto& v : y) v = cplx(std::sqrt(u0) + sd * nd(gen), sd * nd(gen));
      alarms += statistic(cfg, make_block(1, 512, y), in.noise) > tau;
    }
    CAPTURE(cfg.label());
    CHECK(std::abs(alarms / double(trials) - 0.05) <= 0.0066);
  }
}

TEST_CASE("analytic detection probability") {
  const auto same = inputs(0.2, 0.2);
  for (const auto& cfg : {ted(), ied(0.7)}) CHECK(analytic_pd(cfg, moments(cfg, same)) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(analytic_pd(ted(), ted_moments(inputs(0.0, 1e3))) == doctest::Approx(1.0));

  // TED, N = 512, gamma0 = 0, gamma1 = 1 (energy form), 10^5 trials
  const double u1 = 1.0 / 512;
  const auto in = inputs(0.0, u1);
  const double pd = analytic_pd(ted(), ted_moments(in));
  std::mt19937_64 gen(23);
  std::normal_distribution<double> nd;
  const double sd = std::sqrt(0.5), tau = threshold(ted(), ted_moments(in));
  const int trials = 100000;
  int hits = 0;
  std::vector<cplx> y(512);
  for (int t = 0; t < trials; ++t) {
    double e = 0;
    for (auto& v : y) {
      v = cplx(std::sqrt(u1) + sd * nd(gen), sd * nd(gen));
      e += std::norm(v);
    }
    hits += e / 512 > tau;
  }
  const double est = hits / double(trials);
  CHECK(std::abs(est - pd) < 3 * oracle::binomial_se(pd, trials));
}

TEST_CASE("detection probability is monotone and above the false-alarm rate") {
  for (const auto& cfg : {ted(0.01), ied(0.5, 0.05), ied(2.5, 0.2)}) {
    double prev = 0.0;
    for (double u1 = 0.0; u1 < 0.05; u1 += 0.001) {
      const double pd = analytic_pd(cfg, moments(cfg, inputs(0.0, u1)));
      CHECK(pd >= prev - 1e-12);
      CHECK(pd >= cfg.target_pf - 1e-9);
      prev = pd;
    }
  }
}

TEST_CASE("exponent search") {
  // Gaussian noise, high SNR
  auto in = inputs(0.0, 0.02, 512, 1.0, 1.0, true);
  const auto r = optimize_p(in, 0.05);
  const double pd2 = analytic_pd(ied(2.0), ied_moments(2.0, in));
  CHECK(r.pd >= pd2);
  CHECK(r.p > 1.0);
  CHECK(r.p < 3.0);
  const auto again = optimize_p(in, 0.05);
  CHECK(again.p == r.p);
  CHECK(again.pd == r.pd);

  // Laplacian-like noise
  auto lap = inputs(0.0, 0.1, 512, 1.0, 1.0, true);
  lap.noise = {channel::NoiseFamily::McLeish, 1.0, 1.0};
  const auto rl = optimize_p(lap, 0.05);
  CHECK(rl.p <= 1.0);
  CHECK(rl.pd >= analytic_pd(ied(2.0), ied_moments(2.0, lap)));

  CHECK(default_p_grid().size() == 1000);
  CHECK(default_p_grid().front() == 0.1);
  CHECK(default_p_grid().back() == doctest::Approx(3.0).epsilon(1e-15));
  CHECK_THROWS_AS(optimize_p(in, 1.0), DomainError);
}

TEST_CASE("weight search") {
  // no separation between hypotheses
  const auto flat = inputs(0.3, 0.3, 64);
  const auto r = optimize_weights(flat, 0.05);
  CHECK(r.weights.alpha == 0.5);
  CHECK(r.weights.beta == 0.5);

  const auto in = inputs(0.0, 0.005, 512);
  const auto a = optimize_weights(in, 0.05);
  const auto b = optimize_weights(in, 0.05);
  CHECK(a.weights == b.weights);
  CHECK(a.pd == b.pd);
  CHECK(a.weights.alpha + a.weights.beta == doctest::Approx(1.0));
  for (double alpha : {0.1, 0.5, 0.9}) {
    DetectorConfig c;
    c.kind = DetectorKind::Jced;
    c.weights = JcedWeights::from_alpha(alpha);
    CHECK(analytic_pd(c, moments(c, in)) <= a.pd + 1e-12);
  }
}

TEST_CASE("config validation") {
  DetectorConfig c = ied(-1.0);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ied(2.0, 1.0);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ted();
  c.id = "my ted";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  DetectorConfig j;
  j.kind = DetectorKind::Jced;
  j.weights = {0.7, 0.7};
  CHECK_THROWS_AS(j.validate(), ConfigError);
  CHECK(ted().label() == "ted");
}

}  // TEST_SUITE
