#include "ambc/channel.hpp"

#include <cmath>

#include "ambc/errors.hpp"

namespace ambc::channel {

void NoiseModel::validate() const {
  if (!(variance > 0.0) || !std::isfinite(variance)) throw DomainError("noise variance must be positive");
  if (family == NoiseFamily::McLeish && (!(q > 0.0) || !std::isfinite(q)))
    throw DomainError("McLeish q must be positive");
}

void LinkBudget::validate() const {
  for (double v : {sr, tr, st, noise_power})
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("link budget entries must be positive");
}

void GeometryConfig::validate() const {
  for (double d : {d_sr_km, d_st_km, d_tr_km})
    if (!(d > 0.0) || !std::isfinite(d)) throw DomainError("distances must be positive");
  if (!(freq_mhz > 0.0)) throw DomainError("frequency must be positive");
  if (!(bandwidth_hz > 0.0)) throw DomainError("bandwidth must be positive");
  for (double g : {gain_source_db, gain_reader_db, gain_tag_db, noise_density_dbm_hz})
    if (!std::isfinite(g)) throw DomainError("gains and noise density must be finite");
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) {
  if (!(watts > 0.0)) throw DomainError("power must be positive to express in dBm");
  return 10.0 * std::log10(watts) + 30.0;
}

double free_space_pathloss_db(double d_km, double f_mhz) {
  if (!(d_km > 0.0) || !std::isfinite(d_km)) throw DomainError("distance must be positive");
  if (!(f_mhz > 0.0) || !std::isfinite(f_mhz)) throw DomainError("frequency must be positive");
  return 32.45 + 20.0 * std::log10(d_km) + 20.0 * std::log10(f_mhz);
}

LinkBudget build_link_budget(const GeometryConfig& g) {
  g.validate();
  auto link = [&](double d, double ga, double gb) {
    return db_to_linear(ga + gb - free_space_pathloss_db(d, g.freq_mhz));
  };
  LinkBudget b;
  b.sr = link(g.d_sr_km, g.gain_source_db, g.gain_reader_db);
  b.st = link(g.d_st_km, g.gain_source_db, g.gain_tag_db);
  b.tr = link(g.d_tr_km, g.gain_tag_db, g.gain_reader_db);
  b.noise_power = dbm_to_watts(g.noise_density_dbm_hz + 10.0 * std::log10(g.bandwidth_hz));
  b.validate();
  return b;
}

std::complex<double> draw_rayleigh(double variance, Rng& rng) {
  if (!(variance >= 0.0)) throw DomainError("fading variance must be >= 0");
  return rng.cscg(variance);
}

std::complex<double> draw_rician(double kappa, Rng& rng) {
  if (!(kappa >= 0.0)) throw DomainError("Rician factor must be >= 0");
  const double los = std::sqrt(kappa / (kappa + 1.0));
  return los + std::sqrt(1.0 / (kappa + 1.0)) * rng.cscg(1.0);
}

std::complex<double> draw_noise(const NoiseModel& model, Rng& rng) {
  if (model.gaussian()) return rng.cscg(model.variance);
  const double g = rng.gamma(model.q, 1.0 / model.q);
  return std::sqrt(g) * rng.cscg(model.variance);
}

}  // namespace ambc::channel
