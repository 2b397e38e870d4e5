#pragma once

// Observation model: channel realizations and hypothesis-labelled sample blocks.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "ambc/channel.hpp"
#include "ambc/rng.hpp"

namespace ambc::sysmodel {

using cplx = std::complex<double>;

enum class SignalModel { ConstantUnit, IidCscg };
enum class Fading { Rayleigh, Rician };

struct ScenarioParams {
  double ps_watts = 0.01;  // source transmit power
  int n = 512;             // samples per tag symbol
  int m = 1;               // reader antennas
  double xi = 1.0;         // tag reflection coefficient
  double epsilon = 0.0;    // residual interference, relative to the direct-link variance
  bool dic = false;
  channel::NoiseModel noise{};
  double pi0 = 0.5;
  SignalModel signal = SignalModel::ConstantUnit;
  Fading fading = Fading::Rayleigh;
  double kappa = 3.0;

  void validate() const;
  double pi1() const { return 1.0 - pi0; }
};

struct ChannelRealization {
  std::vector<cplx> h_sr;  // per antenna
  std::vector<cplx> h_tr;
  std::vector<cplx> h_ri;  // residual interference, DIC only
  cplx h_st{};
  std::vector<cplx> h0;
  std::vector<cplx> h1;

  int antennas() const { return static_cast<int>(h0.size()); }
  const std::vector<cplx>& h(int bit) const { return bit ? h1 : h0; }
};

/// Fill h0/h1 from the individual links.
ChannelRealization make_realization(std::vector<cplx> h_sr, std::vector<cplx> h_tr, cplx h_st, double xi,
                                    bool dic = false, std::vector<cplx> h_ri = {});

/// Observations y = h_bit s + w, stored row-major with one row per antenna.
struct SampleBlock {
  int m = 1;
  int n = 0;
  int bit = 0;
  std::vector<cplx> y;
  std::vector<cplx> w;
  std::vector<cplx> s;

  std::span<const cplx> row(int antenna) const { return {y.data() + static_cast<std::size_t>(antenna) * n, static_cast<std::size_t>(n)}; }
  cplx& at(int antenna, int sample) { return y[static_cast<std::size_t>(antenna) * n + sample]; }
  cplx at(int antenna, int sample) const { return y[static_cast<std::size_t>(antenna) * n + sample]; }
};

/// Source-signal statistics that enter the detector moments.
struct SignalStats {
  int n = 0;
  double energy = 0.0;   // sum |s|^2
  cplx r_ss1{};          // sum_{n=0}^{N-2} s(n+1) s*(n)
  cplx r_ss2{};          // sum_{n=0}^{N-3} s(n+2) s*(n)
  double edge_energy = 0.0;  // |s(0)|^2 + |s(N-1)|^2
  double power = 0.0;    // per-sample power

  /// Energy form, |h|^2 E_s / sigma^2.
  double gamma_energy(double channel_power, double noise_var) const { return channel_power * energy / noise_var; }
  /// Per-sample form, |h|^2 P_s / sigma^2.
  double gamma_sample(double channel_power, double noise_var) const { return channel_power * power / noise_var; }
};

ChannelRealization generate_realization(const ScenarioParams& params, const channel::LinkBudget& budget, Rng& rng);

SampleBlock generate_block(const ChannelRealization& real, int bit, const ScenarioParams& params, Rng& rng);

SignalStats signal_stats(std::span<const cplx> s);
inline SignalStats signal_stats(const SampleBlock& block) { return signal_stats(block.s); }

/// Statistics expected under the configured signal model (exact for ConstantUnit).
SignalStats signal_stats(const ScenarioParams& params);

}  // namespace ambc::sysmodel
