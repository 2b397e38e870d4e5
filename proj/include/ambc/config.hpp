#pragma once

// Experiment configuration: a JSON document with every key optional. Missing keys
// take the default scenario (N = 512, P_F = 0.05, xi = 1, kappa = 3, 915 MHz,
// 10 MHz, -174 dBm/Hz, gains 6/3/2 dB, distances 6/4/0.5 m, 10^4 trials).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ambc/analysis.hpp"
#include "ambc/channel.hpp"
#include "ambc/detectors.hpp"
#include "ambc/sysmodel.hpp"

namespace ambc::cli {

enum class Experiment { Roc, PdVsPs, BerVsPs, BerVsXi, AucVsPs, PdVsQ, PoptVsPf, WeightsVsPf, BerVsAntennas };

enum class ChannelMode { Redraw, Fixed };

/// Scenario in the units used on the command line (dBm, dB).
struct ScenarioConfig {
  double ps_dbm = 10.0;
  int n = 512;
  int antennas = 1;
  double xi = 1.0;
  double epsilon = 0.0;
  bool dic = false;
  double pi0 = 0.5;
  sysmodel::SignalModel signal = sysmodel::SignalModel::ConstantUnit;
  sysmodel::Fading fading = sysmodel::Fading::Rayleigh;
  double kappa = 3.0;
  channel::NoiseFamily noise_family = channel::NoiseFamily::Cscg;
  double q = 1.0;
  // When false every link has unit power gain and the noise power is 1 mW, so
  // P_s in dBm reads directly as the per-sample SNR in dB.
  bool apply_pathloss = false;

  bool operator==(const ScenarioConfig&) const = default;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::PdVsPs;
  ScenarioConfig scenario;
  channel::GeometryConfig geometry;
  std::vector<double> sweep;
  std::vector<detect::DetectorConfig> detectors;
  std::uint64_t trials = 10000;
  std::optional<std::uint64_t> seed;
  std::string output;  // CSV file name; defaults to <experiment>.csv
  analysis::ThresholdPolicy threshold_policy = analysis::ThresholdPolicy::Genie;
  detect::MomentConvention convention = detect::MomentConvention::Exact;
  ChannelMode channel = ChannelMode::Redraw;

  bool operator==(const ExperimentConfig&) const = default;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  std::string output_name() const;
};

const char* to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);
/// Name of the quantity swept by an experiment, e.g. "ps_dbm".
const char* sweep_axis(Experiment e);

std::vector<double> default_sweep(Experiment e);
std::vector<detect::DetectorConfig> default_detectors(Experiment e);
ExperimentConfig default_config(Experiment e = Experiment::PdVsPs);

/// Parses and validates a JSON config. `source` is used in error messages.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);
std::string serialize(const ExperimentConfig& config);

/// Scenario for one sweep point, in linear units.
sysmodel::ScenarioParams scenario_at(const ExperimentConfig& config, double sweep_value);
channel::LinkBudget link_budget(const ExperimentConfig& config);

}  // namespace ambc::cli
