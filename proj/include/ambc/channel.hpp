#pragma once

// Link budgets, fading draws and noise generation.

#include <complex>

#include "ambc/rng.hpp"

namespace ambc::channel {

enum class NoiseFamily { Cscg, McLeish };

struct NoiseModel {
  NoiseFamily family = NoiseFamily::Cscg;
  double variance = 1.0;  // watts
  double q = 1.0;         // McLeish only

  void validate() const;
  bool gaussian() const { return family == NoiseFamily::Cscg; }
  /// Var(|w|^2) / variance^2: 1 for CSCG, 1 + 2/q for McLeish.
  double kurtosis_factor() const { return gaussian() ? 1.0 : 1.0 + 2.0 / q; }
};

struct LinkBudget {
  double sr = 1.0;  // source -> reader power gain
  double tr = 1.0;  // tag -> reader
  double st = 1.0;  // source -> tag
  double noise_power = 1.0;  // watts

  void validate() const;
};

struct GeometryConfig {
  double d_sr_km = 0.004;
  double d_st_km = 0.006;
  double d_tr_km = 0.0005;
  double freq_mhz = 915.0;
  double gain_source_db = 6.0;
  double gain_reader_db = 3.0;
  double gain_tag_db = 2.0;
  double bandwidth_hz = 10e6;
  double noise_density_dbm_hz = -174.0;

  void validate() const;
  bool operator==(const GeometryConfig&) const = default;
};

double db_to_linear(double db);
double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

/// 32.45 + 20 log10(d) + 20 log10(f), d in km and f in MHz.
double free_space_pathloss_db(double d_km, double f_mhz);

LinkBudget build_link_budget(const GeometryConfig& geom);

std::complex<double> draw_rayleigh(double variance, Rng& rng);

/// sqrt(kappa/(kappa+1)) + sqrt(1/(kappa+1)) CN(0, 1), line-of-sight component fixed at 1.
std::complex<double> draw_rician(double kappa, Rng& rng);

std::complex<double> draw_noise(const NoiseModel& model, Rng& rng);

}  // namespace ambc::channel
