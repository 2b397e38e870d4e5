#include "ambc/sysmodel.hpp"

#include <cmath>

#include "ambc/errors.hpp"

namespace ambc::sysmodel {

void ScenarioParams::validate() const {
  if (!(ps_watts >= 0.0) || !std::isfinite(ps_watts)) throw ConfigError("ps", "source power must be >= 0");
  if (n < 2) throw ConfigError("n", "need at least 2 samples per symbol");
  if (m < 1) throw ConfigError("antennas", "need at least one antenna");
  if (!(xi > 0.0 && xi <= 1.0)) throw ConfigError("xi", "reflection coefficient must lie in (0, 1]");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon", "residual interference must lie in [0, 1]");
  if (!(pi0 > 0.0 && pi0 < 1.0)) throw ConfigError("pi0", "prior must lie in (0, 1)");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ConfigError("kappa", "Rician factor must be >= 0");
  try {
    noise.validate();
  } catch (const DomainError& e) {
    throw ConfigError("noise", e.what());
  }
}

ChannelRealization make_realization(std::vector<cplx> h_sr, std::vector<cplx> h_tr, cplx h_st, double xi, bool dic,
                                    std::vector<cplx> h_ri) {
  if (h_sr.size() != h_tr.size() || h_sr.empty()) throw DomainError("per-antenna link vectors must match in size");
  if (dic && h_ri.size() != h_sr.size()) throw DomainError("residual interference needs one entry per antenna");
  ChannelRealization r;
  r.h_sr = std::move(h_sr);
  r.h_tr = std::move(h_tr);
  r.h_ri = std::move(h_ri);
  r.h_st = h_st;
  const std::size_t m = r.h_sr.size();
  r.h0.resize(m);
  r.h1.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    r.h0[i] = dic ? r.h_ri[i] : r.h_sr[i];
    r.h1[i] = r.h0[i] + xi * r.h_st * r.h_tr[i];
  }
  return r;
}

ChannelRealization generate_realization(const ScenarioParams& params, const channel::LinkBudget& budget, Rng& rng) {
  auto fade = [&](double var) {
    if (params.fading == Fading::Rician) return std::sqrt(var) * channel::draw_rician(params.kappa, rng);
    return channel::draw_rayleigh(var, rng);
  };
  std::vector<cplx> sr(params.m), tr(params.m), ri;
  for (int i = 0; i < params.m; ++i) sr[i] = fade(budget.sr);
  for (int i = 0; i < params.m; ++i) tr[i] = fade(budget.tr);
  const cplx st = fade(budget.st);
  if (params.dic) {
    ri.resize(params.m);
    for (int i = 0; i < params.m; ++i) ri[i] = channel::draw_rayleigh(params.epsilon * budget.sr, rng);
  }
  return make_realization(std::move(sr), std::move(tr), st, params.xi, params.dic, std::move(ri));
}

SampleBlock generate_block(const ChannelRealization& real, int bit, const ScenarioParams& params, Rng& rng) {
  if (bit != 0 && bit != 1) throw DomainError("tag bit must be 0 or 1");
  if (real.antennas() != params.m) throw DomainError("realization antenna count does not match the scenario");
  SampleBlock b;
  b.m = params.m;
  b.n = params.n;
  b.bit = bit;
  b.s.resize(params.n);
  if (params.signal == SignalModel::ConstantUnit) {
    const double a = std::sqrt(params.ps_watts);
    for (auto& v : b.s) v = a;
  } else {
    for (auto& v : b.s) v = rng.cscg(params.ps_watts);
  }
  const std::size_t total = static_cast<std::size_t>(params.m) * params.n;
  b.y.resize(total);
  b.w.resize(total);
  const auto& h = real.h(bit);
  for (int i = 0; i < params.m; ++i) {
    for (int k = 0; k < params.n; ++k) {
      const std::size_t idx = static_cast<std::size_t>(i) * params.n + k;
      b.w[idx] = channel::draw_noise(params.noise, rng);
      b.y[idx] = h[i] * b.s[k] + b.w[idx];
    }
  }
  return b;
}

SignalStats signal_stats(std::span<const cplx> s) {
  if (s.size() < 2) throw DomainError("signal statistics need at least 2 samples");
  SignalStats st;
  st.n = static_cast<int>(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    st.energy += std::norm(s[i]);
    if (i + 1 < s.size()) st.r_ss1 += s[i + 1] * std::conj(s[i]);
    if (i + 2 < s.size()) st.r_ss2 += s[i + 2] * std::conj(s[i]);
  }
  st.edge_energy = std::norm(s.front()) + std::norm(s.back());
  st.power = st.energy / st.n;
  return st;
}

SignalStats signal_stats(const ScenarioParams& params) {
  SignalStats st;
  st.n = params.n;
  st.energy = params.n * params.ps_watts;
  st.power = params.ps_watts;
  st.edge_energy = 2.0 * params.ps_watts;
  if (params.signal == SignalModel::ConstantUnit) {
    st.r_ss1 = (params.n - 1) * params.ps_watts;
    st.r_ss2 = (params.n - 2) * params.ps_watts;
  }
  return st;
}

}  // namespace ambc::sysmodel
