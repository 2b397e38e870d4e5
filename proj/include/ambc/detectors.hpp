#pragma once

// TED, IED and JCED test statistics, their moments under both hypotheses,
// Neyman-Pearson thresholds, closed-form detection probabilities and the
// exponent / weight optimizers.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ambc/channel.hpp"
#include "ambc/specfun.hpp"
#include "ambc/sysmodel.hpp"

namespace ambc::detect {

enum class DetectorKind { Ted, Ied, Jced };

/// Exact: moments of the complex baseband model as generated by sysmodel.
/// Printed: the simpler closed forms, which use real-Gaussian absolute moments for
/// the IED/TED and the complex variance of Z2 for the JCED.
enum class MomentConvention { Exact, Printed };

/// GammaInverse: statistic = shift + Gamma(shape, scale), per hypothesis. Under the exact
/// convention TED/IED match mean, variance and third cumulant (shift != 0 in general);
/// the printed convention matches mean and variance only, single antenna, Gaussian noise.
enum class ThresholdForm { GammaInverse, GaussianClt };

struct JcedWeights {
  double alpha = 0.5;
  double beta = 0.5;

  static JcedWeights from_alpha(double alpha) { return {alpha, 1.0 - alpha}; }
  void validate() const;
  bool operator==(const JcedWeights&) const = default;
};

struct DetectorConfig {
  DetectorKind kind = DetectorKind::Ted;
  double p = 2.0;  // IED only
  JcedWeights weights{};
  double target_pf = 0.05;
  bool optimize = false;  // choose p or the weights per operating point
  std::string id;         // label used in outputs; defaults to a generated name

  void validate() const;
  std::string label() const;
  bool operator==(const DetectorConfig&) const = default;
};

/// Everything the closed forms need about one operating point.
struct MomentInputs {
  sysmodel::SignalStats stats;             // energy and lag correlations of s
  double sample_power = 0.0;               // per-sample power of s
  std::array<std::vector<double>, 2> channel_power;  // |h_j,m|^2 or its mean, per antenna
  channel::NoiseModel noise;
  bool signal_gaussian = false;            // h s modelled as CN per sample rather than fixed
  MomentConvention convention = MomentConvention::Exact;
  specfun::QuadratureSpec quadrature{};

  int antennas() const { return static_cast<int>(channel_power[0].size()); }
  void validate() const;
};

/// Means, variances and covariance of (Z1, Re Z2) under each hypothesis.
struct JointMoments {
  std::array<double, 2> mean_z1{};
  std::array<double, 2> mean_z2{};
  std::array<double, 2> var_z1{};
  std::array<double, 2> var_z2{};
  std::array<double, 2> cov{};

  /// g = mean(H0) - mean(H1), component-wise.
  std::array<double, 2> g() const { return {mean_z1[0] - mean_z1[1], mean_z2[0] - mean_z2[1]}; }
  double quad_form(int hyp, const JcedWeights& w) const;
};

struct HypothesisMoments {
  ThresholdForm form = ThresholdForm::GaussianClt;
  std::array<double, 2> mean{};
  std::array<double, 2> var{};
  std::optional<std::array<specfun::GammaDistParams, 2>> gamma;
  std::array<double, 2> shift{};  // location of the gamma form
  std::optional<JointMoments> joint;

  void validate() const;
};

// Test statistics. Single-antenna Gaussian-noise TED/IED use the 1/N, sigma-normalized
// forms; McLeish noise drops the sigma normalization; multi-antenna forms are plain sums
// (normalized by sigma for the IED).
double ted_statistic(const sysmodel::SampleBlock& block, const channel::NoiseModel& noise);
double ied_statistic(const sysmodel::SampleBlock& block, double p, const channel::NoiseModel& noise);
double jced_statistic(const sysmodel::SampleBlock& block, const JcedWeights& weights);
/// Energy Z1 and real part of the first-lag correlation Z2, summed over antennas.
std::array<double, 2> jced_components(const sysmodel::SampleBlock& block);

double statistic(const DetectorConfig& config, const sysmodel::SampleBlock& block, const channel::NoiseModel& noise);

/// Mean and variance of one sample's |y|^p in raw units under hypothesis-channel power u.
specfun::AbsMoments sample_abs_moments(double p, double u, const MomentInputs& in);

HypothesisMoments ied_moments(double p, const MomentInputs& in);
HypothesisMoments ted_moments(const MomentInputs& in);
JointMoments jced_joint_moments(const MomentInputs& in);
HypothesisMoments jced_moments(const JointMoments& joint, const JcedWeights& weights);
HypothesisMoments jced_moments(const MomentInputs& in, const JcedWeights& weights);

HypothesisMoments moments(const DetectorConfig& config, const MomentInputs& in);

double threshold(const DetectorConfig& config, const HypothesisMoments& m);
double analytic_pd(const DetectorConfig& config, const HypothesisMoments& m);

/// Position of a statistic value in the H0 distribution, mapped to the standard normal
/// scale: the NP test at false-alarm rate P_F is `score > q_inverse(P_F)`.
double h0_score(const HypothesisMoments& m, double value);

/// Channel powers of one realization; the signal statistics come from the block when one
/// is given (needed for the JCED under a random source signal).
MomentInputs genie_inputs(const sysmodel::ScenarioParams& params, const sysmodel::ChannelRealization& real,
                          const sysmodel::SampleBlock* block, MomentConvention convention);

/// Channel powers replaced by their means and the source by its expected statistics.
MomentInputs statistical_inputs(const sysmodel::ScenarioParams& params, const channel::LinkBudget& budget,
                                MomentConvention convention);

/// 1000 evenly spaced points on [0.1, 3].
std::vector<double> default_p_grid();

struct PSearchResult {
  double p = 2.0;
  double pd = 0.0;
};

/// Grid search for the IED exponent maximizing the closed-form P_D at false-alarm rate pf.
/// p = 2 is always evaluated as well. Ties go to the smaller p.
PSearchResult optimize_p(const MomentInputs& in, double pf, const std::vector<double>& grid = default_p_grid());

struct WeightSearchResult {
  JcedWeights weights{};
  double pd = 0.0;
};

/// Grid search over alpha in [0.001, 0.999] with step 0.001, beta = 1 - alpha.
/// Candidates are ranked by the Q argument of P_D; ties (within 1e-12) go to the alpha closest to 0.5.
WeightSearchResult optimize_weights(const JointMoments& joint, double pf);
WeightSearchResult optimize_weights(const MomentInputs& in, double pf);

const char* to_string(DetectorKind kind);
const char* to_string(MomentConvention c);

}  // namespace ambc::detect
