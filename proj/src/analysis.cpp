#include "ambc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <iomanip>
#include <iterator>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "ambc/errors.hpp"
#include "ambc/specfun.hpp"

namespace ambc::analysis {

namespace {

constexpr double kZ95 = 1.959963984540054;

void append(std::ostringstream& os, const std::vector<sysmodel::cplx>& v) {
  for (const auto& c : v) os << c.real() << ',' << c.imag() << ';';
  os << '|';
}

}  // namespace

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials) {
  if (successes > trials) throw DomainError("more successes than trials");
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = successes / n;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = kZ95 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // Clamp so the interval always contains the estimate despite rounding.
  return {std::min(std::max(0.0, centre - half), p), std::max(std::min(1.0, centre + half), p)};
}

Proportion Proportion::from_counts(std::uint64_t successes, std::uint64_t trials) {
  Proportion pr;
  pr.successes = successes;
  pr.trials = trials;
  pr.estimate = trials ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0;
  pr.ci = wilson_interval(successes, trials);
  return pr;
}

double ber(double pf, double pd, double pi0) {
  for (double v : {pf, pd, pi0})
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("ber arguments must be probabilities");
  return pi0 * pf + (1.0 - pi0) * (1.0 - pd);
}

void SimulationSpec::validate() const {
  scenario.validate();
  try {
    budget.validate();
  } catch (const DomainError& e) {
    throw ConfigError("budget", e.what());
  }
  if (trials < 1) throw ConfigError("trials", "need at least one trial");
  if (detectors.empty()) throw ConfigError("detectors", "no detectors configured");
  for (const auto& d : detectors) d.validate();
  if (fixed_channel && fixed_channel->antennas() != scenario.m)
    throw ConfigError("channel", "fixed channel antenna count does not match the scenario");
  if (fixed_bit && *fixed_bit != 0 && *fixed_bit != 1) throw ConfigError("bit", "fixed bit must be 0 or 1");
  for (double pf : roc_pf_grid)
    if (!(pf > 0.0 && pf < 1.0)) throw ConfigError("roc_pf_grid", "false-alarm rates must lie in (0, 1)");
}

std::uint64_t fnv1a(const std::string& text, std::uint64_t h) {
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t SimulationSpec::fingerprint() const {
  std::ostringstream os;
  os << std::setprecision(17);
  const auto& s = scenario;
  os << s.ps_watts << ' ' << s.n << ' ' << s.m << ' ' << s.xi << ' ' << s.epsilon << ' ' << s.dic << ' '
     << static_cast<int>(s.noise.family) << ' ' << s.noise.variance << ' ' << s.noise.q << ' ' << s.pi0 << ' '
     << static_cast<int>(s.signal) << ' ' << static_cast<int>(s.fading) << ' ' << s.kappa << '\n';
  os << budget.sr << ' ' << budget.tr << ' ' << budget.st << ' ' << budget.noise_power << '\n';
  for (const auto& d : detectors)
    os << static_cast<int>(d.kind) << ' ' << d.p << ' ' << d.weights.alpha << ' ' << d.weights.beta << ' '
       << d.target_pf << ' ' << d.optimize << ' ' << d.label() << '\n';
  os << trials << ' ' << seed << ' ' << static_cast<int>(threshold_policy) << ' ' << static_cast<int>(convention)
     << ' ' << keep_scores << '\n';
  for (double pf : roc_pf_grid) os << pf << ' ';
  if (fixed_channel) {
    append(os, fixed_channel->h0);
    append(os, fixed_channel->h1);
  }
  if (fixed_bit) os << "bit" << *fixed_bit;
  return fnv1a(os.str());
}

namespace {

bool same_inputs(const detect::MomentInputs& a, const detect::MomentInputs& b) {
  const auto& x = a.stats;
  const auto& y = b.stats;
  return x.n == y.n && x.energy == y.energy && x.r_ss1 == y.r_ss1 && x.r_ss2 == y.r_ss2 &&
         x.edge_energy == y.edge_energy && x.power == y.power && a.sample_power == b.sample_power &&
         a.channel_power == b.channel_power && a.noise.family == b.noise.family &&
         a.noise.variance == b.noise.variance && a.noise.q == b.noise.q && a.signal_gaussian == b.signal_gaussian &&
         a.convention == b.convention;
}

}  // namespace

std::vector<DetectorOutcome> run_trials(const SimulationSpec& spec) {
  spec.validate();
  const auto& scn = spec.scenario;
  const std::size_t nd = spec.detectors.size();
  const std::uint64_t nt = spec.trials;

  // Resolve optimized detectors once per operating point from the mean channel powers.
  std::vector<detect::DetectorConfig> configs = spec.detectors;
  std::optional<detect::MomentInputs> stat_inputs;
  auto statistical = [&]() -> const detect::MomentInputs& {
    if (!stat_inputs) stat_inputs = detect::statistical_inputs(scn, spec.budget, spec.convention);
    return *stat_inputs;
  };
  for (auto& c : configs) {
    if (!c.optimize) continue;
    if (c.kind == detect::DetectorKind::Ied) c.p = detect::optimize_p(statistical(), c.target_pf).p;
    if (c.kind == detect::DetectorKind::Jced) c.weights = detect::optimize_weights(statistical(), c.target_pf).weights;
  }

  std::vector<detect::HypothesisMoments> fixed_moments;
  std::vector<double> fixed_tau, fixed_pd;
  const bool genie = spec.threshold_policy == ThresholdPolicy::Genie;
  if (!genie) {
    for (const auto& c : configs) {
      fixed_moments.push_back(detect::moments(c, statistical()));
      fixed_tau.push_back(detect::threshold(c, fixed_moments.back()));
      fixed_pd.push_back(detect::analytic_pd(c, fixed_moments.back()));
    }
  }

  std::vector<std::uint8_t> bits(nt);
  std::vector<std::uint8_t> decisions(nt * nd);
  std::vector<double> cf_pd(nt * nd);
  std::vector<double> scores(spec.keep_scores ? nt * nd : 0);
  const std::size_t ng = spec.roc_pf_grid.size();
  std::vector<double> grid_pd(nt * nd * ng);
  auto grid_pds = [&](const detect::DetectorConfig& c, const detect::HypothesisMoments& m, double* out) {
    detect::DetectorConfig at = c;
    for (std::size_t g = 0; g < ng; ++g) {
      at.target_pf = spec.roc_pf_grid[g];
      out[g] = detect::analytic_pd(at, m);
    }
  };
  std::vector<std::vector<double>> fixed_grid(nd, std::vector<double>(ng));
  if (!genie)
    for (std::size_t d = 0; d < nd; ++d) grid_pds(configs[d], fixed_moments[d], fixed_grid[d].data());

  // Genie moments are reused while the inputs repeat (fixed channel, constant signal).
  struct Cached {
    detect::HypothesisMoments m;
    double tau = 0.0;
    double pd = 0.0;
    std::vector<double> grid;
  };

  auto run_range = [&](std::uint64_t begin, std::uint64_t end) {
    std::optional<detect::MomentInputs> last_in;
    std::vector<Cached> cache(nd);
    for (std::uint64_t t = begin; t < end; ++t) {
      Rng rng = Rng::stream(spec.seed, t);
      const sysmodel::ChannelRealization real =
          spec.fixed_channel ? *spec.fixed_channel : sysmodel::generate_realization(scn, spec.budget, rng);
      const int bit = spec.fixed_bit ? *spec.fixed_bit : (rng.bernoulli(scn.pi1()) ? 1 : 0);
      const sysmodel::SampleBlock block = sysmodel::generate_block(real, bit, scn, rng);
      bits[t] = static_cast<std::uint8_t>(bit);
      if (genie) {
        auto in = detect::genie_inputs(scn, real, &block, spec.convention);
        if (!last_in || !same_inputs(in, *last_in)) {
          for (std::size_t d = 0; d < nd; ++d) {
            auto& k = cache[d];
            k.m = detect::moments(configs[d], in);
            k.tau = detect::threshold(configs[d], k.m);
            k.pd = detect::analytic_pd(configs[d], k.m);
            k.grid.resize(ng);
            if (ng) grid_pds(configs[d], k.m, k.grid.data());
          }
          last_in = std::move(in);
        }
      }
      for (std::size_t d = 0; d < nd; ++d) {
        const auto& c = configs[d];
        const double value = detect::statistic(c, block, scn.noise);
        const std::size_t idx = t * nd + d;
        if (genie) {
          const auto& k = cache[d];
          decisions[idx] = value > k.tau;
          cf_pd[idx] = k.pd;
          if (spec.keep_scores) scores[idx] = detect::h0_score(k.m, value);
          std::copy(k.grid.begin(), k.grid.end(), grid_pd.begin() + idx * ng);
        } else {
          decisions[idx] = value > fixed_tau[d];
          cf_pd[idx] = fixed_pd[d];
          if (spec.keep_scores) scores[idx] = detect::h0_score(fixed_moments[d], value);
          std::copy(fixed_grid[d].begin(), fixed_grid[d].end(), grid_pd.begin() + idx * ng);
        }
      }
    }
  };

  unsigned threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, nt));
  if (threads <= 1) {
    run_range(0, nt);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    const std::uint64_t chunk = (nt + threads - 1) / threads;
    for (unsigned i = 0; i < threads; ++i) {
      const std::uint64_t b = i * chunk;
      const std::uint64_t e = std::min(nt, b + chunk);
      if (b >= e) break;
      pool.emplace_back([&, b, e] {
        try {
          run_range(b, e);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }

  const std::uint64_t fp = spec.fingerprint();
  std::vector<DetectorOutcome> out(nd);
  for (std::size_t d = 0; d < nd; ++d) {
    std::uint64_t n0 = 0, n1 = 0, fa = 0, det = 0;
    double pd_sum = 0.0;
    auto& o = out[d];
    o.config = configs[d];
    for (std::uint64_t t = 0; t < nt; ++t) {
      const std::size_t idx = t * nd + d;
      pd_sum += cf_pd[idx];
      if (bits[t]) {
        ++n1;
        det += decisions[idx];
        if (spec.keep_scores) o.scores_h1.push_back(scores[idx]);
      } else {
        ++n0;
        fa += decisions[idx];
        if (spec.keep_scores) o.scores_h0.push_back(scores[idx]);
      }
    }
    o.closed_form_roc_pd.assign(ng, 0.0);
    for (std::uint64_t t = 0; t < nt; ++t)
      for (std::size_t g = 0; g < ng; ++g) o.closed_form_roc_pd[g] += grid_pd[(t * nd + d) * ng + g];
    for (auto& v : o.closed_form_roc_pd) v /= static_cast<double>(nt);
    auto& s = o.summary;
    s.trials = nt;
    s.seed = spec.seed;
    s.fingerprint = fp;
    s.pf = Proportion::from_counts(fa, n0);
    s.pd = Proportion::from_counts(det, n1);
    s.ber = Proportion::from_counts(fa + (n1 - det), nt);
    s.closed_form_pf = configs[d].target_pf;
    s.closed_form_pd = pd_sum / static_cast<double>(nt);
    s.closed_form_ber = ber(s.closed_form_pf, s.closed_form_pd, scn.pi0);
  }
  return out;
}

RocCurve empirical_roc(const std::vector<double>& scores_h0, const std::vector<double>& scores_h1) {
  if (scores_h0.empty() || scores_h1.empty()) throw DomainError("ROC needs scores under both hypotheses");
  for (const auto* v : {&scores_h0, &scores_h1})
    for (double s : *v)
      if (std::isnan(s)) throw DomainError("ROC scores must not be NaN");
  std::vector<double> a = scores_h0, b = scores_h1;
  std::sort(a.begin(), a.end(), std::greater<>());
  std::sort(b.begin(), b.end(), std::greater<>());
  std::vector<double> pooled;
  pooled.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(pooled), std::greater<>());
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

  const double n0 = static_cast<double>(a.size());
  const double n1 = static_cast<double>(b.size());
  RocCurve roc;
  std::size_t i = 0, j = 0;  // counts of scores strictly above the running threshold
  for (std::size_t k = 0; k < pooled.size(); ++k) {
    const double t = pooled[k];
    // Decision score > t: advance past the scores above t; lowering t to the next distinct
    // value admits every score equal to the current t.
    while (i < a.size() && a[i] > t) ++i;
    while (j < b.size() && b[j] > t) ++j;
    const RocPoint pt{i / n0, j / n1, t};
    if (!roc.points.empty() && roc.points.back().pf == pt.pf) {
      roc.points.back() = pt;
    } else {
      roc.points.push_back(pt);
    }
  }
  // Threshold below every score: everything is declared H1.
  const RocPoint last{1.0, 1.0, -std::numeric_limits<double>::infinity()};
  if (roc.points.back().pf == 1.0)
    roc.points.back() = last;
  else
    roc.points.push_back(last);
  return roc;
}

double auc_trapezoid(const RocCurve& roc) {
  double prev_f = 0.0, prev_d = 0.0, area = 0.0;
  auto add = [&](double f, double d) {
    area += (f - prev_f) * (d + prev_d) * 0.5;
    prev_f = f;
    prev_d = d;
  };
  for (const auto& p : roc.points) add(p.pf, p.pd);
  add(1.0, 1.0);
  return area;
}

AucInputs AucInputs::from_moments(const detect::HypothesisMoments& m) {
  m.validate();
  const double s1 = std::sqrt(m.var[1]);
  return {(m.mean[0] - m.mean[1]) / s1, std::sqrt(m.var[0]) / s1};
}

Interval auc_interval(double auc, std::uint64_t n0, std::uint64_t n1) {
  if (!(auc >= 0.0 && auc <= 1.0)) throw DomainError("AUC must lie in [0, 1]");
  if (n0 == 0 || n1 == 0) return {0.0, 1.0};
  const double q1 = auc / (2.0 - auc);
  const double q2 = 2.0 * auc * auc / (1.0 + auc);
  const double a2 = auc * auc;
  const double var = (auc * (1.0 - auc) + (n1 - 1.0) * (q1 - a2) + (n0 - 1.0) * (q2 - a2)) /
                     (static_cast<double>(n0) * static_cast<double>(n1));
  const double half = kZ95 * std::sqrt(std::max(var, 0.0));
  return {std::max(0.0, auc - half), std::min(1.0, auc + half)};
}

double auc_closed_form(const AucInputs& in) {
  if (!(in.b > 0.0)) throw DomainError("AUC needs b > 0");
  if (std::isinf(in.a)) return in.a < 0 ? 1.0 : 0.0;
  return specfun::q_function(in.a / std::sqrt(in.b * in.b + 1.0));
}

RocCurve analytic_roc(const AucInputs& in, const std::vector<double>& pf_grid) {
  if (!(in.b > 0.0)) throw DomainError("ROC needs b > 0");
  RocCurve roc;
  for (double pf : pf_grid) {
    if (!(pf > 0.0 && pf < 1.0)) throw DomainError("ROC grid must lie in (0, 1)");
    if (!roc.points.empty() && pf <= roc.points.back().pf) throw DomainError("ROC grid must be increasing");
    const double z = specfun::q_inverse(pf);
    roc.points.push_back({pf, specfun::q_function(in.b * z + in.a), z});
  }
  return roc;
}

double roc_pd_at(const RocCurve& roc, double pf) {
  double pd = 0.0;
  for (const auto& p : roc.points) {
    if (p.pf > pf) break;
    pd = std::max(pd, p.pd);
  }
  return pd;
}

}  // namespace ambc::analysis
