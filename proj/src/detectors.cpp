#include "ambc/detectors.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ambc/errors.hpp"

namespace ambc::detect {

using specfun::AbsMoments;
using sysmodel::cplx;
using sysmodel::SampleBlock;

void JcedWeights::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0) || !(beta >= 0.0 && beta <= 1.0))
    throw ConfigError("weights", "JCED weights must lie in [0, 1]");
  if (std::abs(alpha + beta - 1.0) > 1e-9) throw ConfigError("weights", "JCED weights must sum to one");
}

void DetectorConfig::validate() const {
  if (!(p > 0.0) || !std::isfinite(p)) throw ConfigError("p", "IED exponent must be positive");
  if (!(target_pf > 0.0 && target_pf < 1.0)) throw ConfigError("pf", "target false-alarm rate must lie in (0, 1)");
  if (kind == DetectorKind::Jced) weights.validate();
  for (char c : id)
    if (c == ',' || c == '"' || c == '\'' || std::isspace(static_cast<unsigned char>(c)))
      throw ConfigError("id", "detector id must not contain spaces, commas or quotes");
}

std::string DetectorConfig::label() const {
  if (!id.empty()) return id;
  std::ostringstream os;
  switch (kind) {
    case DetectorKind::Ted:
      os << "ted";
      break;
    case DetectorKind::Ied:
      os << "ied";
      if (optimize)
        os << "-popt";
      else
        os << "-p" << p;
      break;
    case DetectorKind::Jced:
      os << "jced";
      if (optimize)
        os << "-wopt";
      else
        os << "-a" << weights.alpha;
      break;
  }
  return os.str();
}

void MomentInputs::validate() const {
  noise.validate();
  if (channel_power[0].empty() || channel_power[0].size() != channel_power[1].size())
    throw DomainError("channel powers must be given for every antenna under both hypotheses");
  for (const auto& v : channel_power)
    for (double u : v)
      if (!(u >= 0.0) || !std::isfinite(u)) throw DomainError("channel power must be >= 0");
  if (!(sample_power >= 0.0)) throw DomainError("signal power must be >= 0");
  if (stats.n < 2) throw DomainError("at least 2 samples per block are needed");
}

double JointMoments::quad_form(int hyp, const JcedWeights& w) const {
  return w.alpha * w.alpha * var_z1[hyp] + w.beta * w.beta * var_z2[hyp] + 2.0 * w.alpha * w.beta * cov[hyp];
}

void HypothesisMoments::validate() const {
  for (int j = 0; j < 2; ++j) {
    if (!(var[j] > 0.0) || !std::isfinite(var[j])) throw NumericError("statistic variance is not positive", var[j]);
    if (!std::isfinite(mean[j])) throw NumericError("statistic mean is not finite", mean[j]);
  }
}

namespace {

bool single_gaussian(const MomentInputs& in) { return in.antennas() == 1 && in.noise.gaussian(); }

// Factor applied to the raw sum of |y|^p to form the statistic.
double abs_power_scale(double p, bool ted, int antennas, int n, const channel::NoiseModel& noise) {
  if (antennas == 1) return noise.gaussian() ? 1.0 / (n * std::pow(noise.variance, 0.5 * p)) : 1.0 / n;
  if (noise.gaussian() && !ted) return 1.0 / std::pow(noise.variance, 0.5 * p);
  return 1.0;
}

double abs_power_sum(const SampleBlock& block, double p) {
  double sum = 0.0;
  if (p == 2.0) {
    for (const cplx& v : block.y) sum += std::norm(v);
  } else {
    for (const cplx& v : block.y) sum += std::pow(std::abs(v), p);
  }
  return sum;
}

// Per-sample E|y|^p and E|y|^2p with y real Gaussian in each dimension (printed convention).
AbsMoments printed_gaussian_moments(double p, double total_power) {
  const double m1 = std::pow(2.0, 0.5 * p) * std::tgamma(0.5 * (p + 1.0)) / std::sqrt(std::numbers::pi) *
                    std::pow(total_power, 0.5 * p);
  const double m2 = std::pow(2.0, p) * std::tgamma(p + 0.5) / std::sqrt(std::numbers::pi) * std::pow(total_power, p);
  return {m1, m2 - m1 * m1};
}

// E|y|^r of one sample under channel power u.
double sample_abs_raw(double r, double u, const MomentInputs& in) {
  const double s = u * in.sample_power;
  const double var = in.noise.variance;
  if (in.noise.gaussian()) {
    if (in.signal_gaussian) return std::tgamma(1.0 + 0.5 * r) * std::pow(s + var, 0.5 * r);
    return specfun::rice_raw_moment(r, s, var);
  }
  if (in.signal_gaussian) return specfun::mcleish_abs_moment(r, in.noise.q, s, var, in.quadrature);
  return specfun::mcleish_rice_raw_moment(r, in.noise.q, s, var, in.quadrature);
}

HypothesisMoments abs_power_moments(double p, bool ted, const MomentInputs& in) {
  in.validate();
  if (!(p > 0.0)) throw DomainError("IED exponent must be positive");
  const int n = in.stats.n;
  const double c = abs_power_scale(p, ted, in.antennas(), n, in.noise);
  HypothesisMoments out;
  for (int j = 0; j < 2; ++j) {
    double mean = 0.0, var = 0.0;
    double last_u = -1.0;
    AbsMoments last{};
    for (double u : in.channel_power[j]) {
      if (u != last_u) {
        last = sample_abs_moments(p, u, in);
        last_u = u;
      }
      mean += n * last.mean;
      var += n * last.variance;
    }
    out.mean[j] = c * mean;
    out.var[j] = c * c * var;
  }
  out.validate();
  if (in.convention == MomentConvention::Printed) {
    if (single_gaussian(in)) {
      out.form = ThresholdForm::GammaInverse;
      out.gamma = std::array<specfun::GammaDistParams, 2>{
          specfun::GammaDistParams::from_moments(out.mean[0], out.var[0]),
          specfun::GammaDistParams::from_moments(out.mean[1], out.var[1])};
    } else {
      out.form = ThresholdForm::GaussianClt;
    }
    return out;
  }
  // Pearson type III: shifted gamma with the sum's skewness. Falls back to the two-moment
  // gamma when the third cumulant is lost to cancellation.
  out.form = ThresholdForm::GammaInverse;
  std::array<specfun::GammaDistParams, 2> g;
  for (int j = 0; j < 2; ++j) {
    double k3 = 0.0;
    double last_u = -1.0, last_k3 = 0.0;
    for (double u : in.channel_power[j]) {
      if (u != last_u) {
        const AbsMoments m = sample_abs_moments(p, u, in);
        last_k3 = sample_abs_raw(3.0 * p, u, in) - 3.0 * m.mean * m.variance - m.mean * m.mean * m.mean;
        last_u = u;
      }
      k3 += n * last_k3;
    }
    const double sd = std::sqrt(out.var[j]);
    const double skew = c * c * c * k3 / (sd * sd * sd);
    if (std::isfinite(skew) && skew > 1e-9) {
      g[j] = {4.0 / (skew * skew), 0.5 * sd * skew};
      out.shift[j] = out.mean[j] - g[j].shape * g[j].scale;
    } else {
      g[j] = specfun::GammaDistParams::from_moments(out.mean[j], out.var[j]);
      out.shift[j] = 0.0;
    }
  }
  out.gamma = g;
  return out;
}

// Standard normal scale of an upper-tail probability, clamped where q_inverse is unusable.
double tail_to_score(double tail, double fallback) {
  if (tail >= 1.0 - 1e-16) return std::min(fallback, -8.2);
  if (tail <= 1e-300) return std::max(fallback, 37.0);
  return specfun::q_inverse(tail);
}

}  // namespace

specfun::AbsMoments sample_abs_moments(double p, double u, const MomentInputs& in) {
  const double s = u * in.sample_power;
  const double var = in.noise.variance;
  if (in.noise.gaussian()) {
    if (in.convention == MomentConvention::Printed) return printed_gaussian_moments(p, s + var);
    if (!in.signal_gaussian) return specfun::rice_abs_moments(p, s, var);
    const double c = std::pow(s + var, 0.5 * p);
    const double m1 = std::tgamma(1.0 + 0.5 * p);
    return {m1 * c, (std::tgamma(1.0 + p) - m1 * m1) * c * c};
  }
  const double q = in.noise.q;
  if (in.convention == MomentConvention::Exact && !in.signal_gaussian)
    return specfun::mcleish_rice_abs_moments(p, q, s, var, in.quadrature);
  const double m1 = specfun::mcleish_abs_moment(p, q, s, var, in.quadrature);
  const double m2 = specfun::mcleish_abs_moment(2.0 * p, q, s, var, in.quadrature);
  return {m1, m2 - m1 * m1};
}

double ted_statistic(const SampleBlock& block, const channel::NoiseModel& noise) {
  if (block.y.empty()) throw DomainError("empty sample block");
  return abs_power_scale(2.0, true, block.m, block.n, noise) * abs_power_sum(block, 2.0);
}

double ied_statistic(const SampleBlock& block, double p, const channel::NoiseModel& noise) {
  if (!(p > 0.0)) throw DomainError("IED exponent must be positive");
  if (block.y.empty()) throw DomainError("empty sample block");
  return abs_power_scale(p, false, block.m, block.n, noise) * abs_power_sum(block, p);
}

std::array<double, 2> jced_components(const SampleBlock& block) {
  if (block.n < 2) throw DomainError("JCED needs at least 2 samples");
  double z1 = 0.0, z2 = 0.0;
  for (int m = 0; m < block.m; ++m) {
    const auto row = block.row(m);
    for (int k = 0; k < block.n; ++k) {
      z1 += std::norm(row[k]);
      if (k + 1 < block.n) z2 += (row[k + 1] * std::conj(row[k])).real();
    }
  }
  return {z1, z2};
}

double jced_statistic(const SampleBlock& block, const JcedWeights& weights) {
  const auto z = jced_components(block);
  return weights.alpha * z[0] + weights.beta * z[1];
}

double statistic(const DetectorConfig& config, const SampleBlock& block, const channel::NoiseModel& noise) {
  switch (config.kind) {
    case DetectorKind::Ted:
      return ted_statistic(block, noise);
    case DetectorKind::Ied:
      return ied_statistic(block, config.p, noise);
    case DetectorKind::Jced:
      return jced_statistic(block, config.weights);
  }
  throw DomainError("unknown detector kind");
}

HypothesisMoments ied_moments(double p, const MomentInputs& in) { return abs_power_moments(p, false, in); }

HypothesisMoments ted_moments(const MomentInputs& in) { return abs_power_moments(2.0, true, in); }

JointMoments jced_joint_moments(const MomentInputs& in) {
  in.validate();
  const auto& st = in.stats;
  const double n = st.n;
  const double s2 = in.noise.variance;
  const double kurt = in.noise.kurtosis_factor();
  JointMoments jm;
  for (int j = 0; j < 2; ++j) {
    for (double u : in.channel_power[j]) {
      jm.mean_z1[j] += u * st.energy + n * s2;
      jm.mean_z2[j] += u * st.r_ss1.real();
      jm.var_z1[j] += kurt * n * s2 * s2 + 2.0 * s2 * u * st.energy;
      if (in.convention == MomentConvention::Printed) {
        jm.var_z2[j] += (n - 1.0) * s2 * s2 + 2.0 * st.energy * u * s2;
      } else {
        jm.var_z2[j] += 0.5 * (n - 1.0) * s2 * s2 +
                        0.5 * s2 * u * (2.0 * st.energy - st.edge_energy + 2.0 * st.r_ss2.real());
      }
      jm.cov[j] += 2.0 * s2 * u * st.r_ss1.real();
    }
  }
  return jm;
}

HypothesisMoments jced_moments(const JointMoments& joint, const JcedWeights& weights) {
  weights.validate();
  HypothesisMoments out;
  out.form = ThresholdForm::GaussianClt;
  for (int j = 0; j < 2; ++j) {
    out.mean[j] = weights.alpha * joint.mean_z1[j] + weights.beta * joint.mean_z2[j];
    out.var[j] = joint.quad_form(j, weights);
  }
  out.joint = joint;
  out.validate();
  return out;
}

HypothesisMoments jced_moments(const MomentInputs& in, const JcedWeights& weights) {
  return jced_moments(jced_joint_moments(in), weights);
}

HypothesisMoments moments(const DetectorConfig& config, const MomentInputs& in) {
  switch (config.kind) {
    case DetectorKind::Ted:
      return ted_moments(in);
    case DetectorKind::Ied:
      return ied_moments(config.p, in);
    case DetectorKind::Jced:
      return jced_moments(in, config.weights);
  }
  throw DomainError("unknown detector kind");
}

double threshold(const DetectorConfig& config, const HypothesisMoments& m) {
  const double pf = config.target_pf;
  if (!(pf > 0.0 && pf < 1.0)) throw DomainError("target false-alarm rate must lie in (0, 1)");
  if (m.form == ThresholdForm::GammaInverse) {
    if (!m.gamma) throw DomainError("gamma threshold requested without gamma parameters");
    return m.shift[0] + specfun::gamma_cdf_inverse(1.0 - pf, (*m.gamma)[0]);
  }
  return m.mean[0] + specfun::q_inverse(pf) * std::sqrt(m.var[0]);
}

double analytic_pd(const DetectorConfig& config, const HypothesisMoments& m) {
  const double tau = threshold(config, m);
  if (m.form == ThresholdForm::GammaInverse) return specfun::gamma_sf(std::max(tau - m.shift[1], 0.0), (*m.gamma)[1]);
  return specfun::q_function((tau - m.mean[1]) / std::sqrt(m.var[1]));
}

namespace {

// 1 - analytic_pd without the cancellation, so candidates stay ordered when P_D rounds to 1.
// When the miss probability underflows as well, the standardized margin decides.
struct MissKey {
  double miss;
  double margin;
  bool operator<(const MissKey& o) const { return miss < o.miss || (miss == o.miss && margin > o.margin); }
  bool operator==(const MissKey& o) const { return miss == o.miss && margin == o.margin; }
};

MissKey analytic_miss(const DetectorConfig& config, const HypothesisMoments& m) {
  const double tau = threshold(config, m);
  const double margin = (m.mean[1] - tau) / std::sqrt(m.var[1]);
  if (m.form == ThresholdForm::GammaInverse)
    return {specfun::gamma_cdf(std::max(tau - m.shift[1], 0.0), (*m.gamma)[1]), margin};
  return {specfun::q_function(margin), margin};
}

}  // namespace

double h0_score(const HypothesisMoments& m, double value) {
  const double z = (value - m.mean[0]) / std::sqrt(m.var[0]);
  if (m.form == ThresholdForm::GaussianClt) return z;
  if (!m.gamma) throw DomainError("gamma score requested without gamma parameters");
  return tail_to_score(specfun::gamma_sf(std::max(value - m.shift[0], 0.0), (*m.gamma)[0]), z);
}

MomentInputs genie_inputs(const sysmodel::ScenarioParams& params, const sysmodel::ChannelRealization& real,
                          const SampleBlock* block, MomentConvention convention) {
  MomentInputs in;
  in.stats = block ? sysmodel::signal_stats(*block) : sysmodel::signal_stats(params);
  in.sample_power = params.ps_watts;
  for (int j = 0; j < 2; ++j) {
    in.channel_power[j].reserve(real.antennas());
    for (const cplx& h : real.h(j)) in.channel_power[j].push_back(std::norm(h));
  }
  in.noise = params.noise;
  in.signal_gaussian = params.signal == sysmodel::SignalModel::IidCscg;
  in.convention = convention;
  return in;
}

MomentInputs statistical_inputs(const sysmodel::ScenarioParams& params, const channel::LinkBudget& budget,
                                MomentConvention convention) {
  MomentInputs in;
  in.stats = sysmodel::signal_stats(params);
  in.sample_power = params.ps_watts;
  const double s0 = params.dic ? params.epsilon * budget.sr : budget.sr;
  const double s1 = s0 + params.xi * params.xi * budget.st * budget.tr;
  in.channel_power[0].assign(params.m, s0);
  in.channel_power[1].assign(params.m, s1);
  in.noise = params.noise;
  in.signal_gaussian = true;
  in.convention = convention;
  return in;
}

std::vector<double> default_p_grid() {
  std::vector<double> g(1000);
  for (int i = 0; i < 1000; ++i) g[i] = 0.1 + (3.0 - 0.1) * i / 999.0;
  return g;
}

PSearchResult optimize_p(const MomentInputs& in, double pf, const std::vector<double>& grid) {
  if (!(pf > 0.0 && pf < 1.0)) throw DomainError("target false-alarm rate must lie in (0, 1)");
  std::vector<double> candidates = grid;
  candidates.push_back(2.0);
  DetectorConfig cfg;
  cfg.kind = DetectorKind::Ied;
  cfg.target_pf = pf;
  double best_p = 2.0;
  MissKey best{2.0, 0.0};
  for (double p : candidates) {
    if (!(p > 0.0)) throw DomainError("exponent grid must be positive");
    cfg.p = p;
    const MissKey key = analytic_miss(cfg, ied_moments(p, in));
    if (key < best || (key == best && p < best_p)) {
      best_p = p;
      best = key;
    }
  }
  return {best_p, 1.0 - best.miss};
}

WeightSearchResult optimize_weights(const JointMoments& joint, double pf) {
  if (!(pf > 0.0 && pf < 1.0)) throw DomainError("target false-alarm rate must lie in (0, 1)");
  const double z = specfun::q_inverse(pf);
  const auto g = joint.g();
  // P_D = Q(arg), so the smallest arg wins; comparing arg keeps the order past P_D = 1
  JcedWeights best = JcedWeights::from_alpha(0.5);
  double best_arg = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 999; ++i) {
    const JcedWeights w = JcedWeights::from_alpha(i / 1000.0);
    const double v0 = joint.quad_form(0, w);
    const double v1 = joint.quad_form(1, w);
    if (!(v0 > 0.0) || !(v1 > 0.0)) continue;
    const double arg = (std::sqrt(v0) * z + w.alpha * g[0] + w.beta * g[1]) / std::sqrt(v1);
    const double band = std::isfinite(best_arg) ? 1e-12 * std::max(1.0, std::abs(best_arg)) : 0.0;
    const bool better = arg < best_arg - band;
    const bool tie = std::abs(arg - best_arg) <= band && std::abs(w.alpha - 0.5) < std::abs(best.alpha - 0.5);
    if (better || tie) {
      best = w;
      best_arg = arg;
    }
  }
  if (!std::isfinite(best_arg)) throw NumericError("no admissible JCED weights", best_arg);
  return {best, specfun::q_function(best_arg)};
}

WeightSearchResult optimize_weights(const MomentInputs& in, double pf) {
  return optimize_weights(jced_joint_moments(in), pf);
}

const char* to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::Ted:
      return "ted";
    case DetectorKind::Ied:
      return "ied";
    case DetectorKind::Jced:
      return "jced";
  }
  return "?";
}

const char* to_string(MomentConvention c) { return c == MomentConvention::Exact ? "exact" : "printed"; }

}  // namespace ambc::detect
