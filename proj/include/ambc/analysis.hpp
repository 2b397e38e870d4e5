#pragma once

// Monte Carlo engine, empirical ROC and BER estimation, AUC.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ambc/channel.hpp"
#include "ambc/detectors.hpp"
#include "ambc/sysmodel.hpp"

namespace ambc::analysis {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval at 95%. With zero trials the interval is [0, 1].
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials);

struct Proportion {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double estimate = 0.0;
  Interval ci{};

  static Proportion from_counts(std::uint64_t successes, std::uint64_t trials);
};

struct TrialSummary {
  std::uint64_t trials = 0;
  Proportion pf;   // over H0 trials
  Proportion pd;   // over H1 trials
  Proportion ber;  // over all trials
  std::uint64_t seed = 0;
  std::uint64_t fingerprint = 0;
  double closed_form_pf = 0.0;  // design false-alarm rate
  double closed_form_pd = 0.0;  // closed-form P_D averaged over the trials
  double closed_form_ber = 0.0;
};

double ber(double pf, double pd, double pi0);

enum class ThresholdPolicy {
  Genie,        // moments conditioned on each trial's channel (and source block)
  Statistical,  // moments from the mean channel powers, fixed for the whole run
};

struct SimulationSpec {
  sysmodel::ScenarioParams scenario;
  channel::LinkBudget budget;
  std::vector<detect::DetectorConfig> detectors;
  std::uint64_t trials = 10000;
  std::uint64_t seed = 1;
  ThresholdPolicy threshold_policy = ThresholdPolicy::Genie;
  detect::MomentConvention convention = detect::MomentConvention::Exact;
  std::optional<sysmodel::ChannelRealization> fixed_channel;  // otherwise one draw per trial
  std::optional<int> fixed_bit;                               // otherwise drawn from the priors
  bool keep_scores = false;
  std::vector<double> roc_pf_grid;  // closed-form P_D is also averaged at these false-alarm rates
  unsigned threads = 0;  // 0 = hardware concurrency

  void validate() const;
  /// FNV-1a hash of every field that affects the outcome (threads excluded).
  std::uint64_t fingerprint() const;
};

struct DetectorOutcome {
  detect::DetectorConfig config;
  TrialSummary summary;
  std::vector<double> scores_h0;  // h0_score of every H0 trial, when kept
  std::vector<double> scores_h1;
  std::vector<double> closed_form_roc_pd;  // one entry per roc_pf_grid value
};

/// Runs `trials` independent trials. Trial t uses the random stream (seed, t), and all
/// detectors see the same block, so results do not depend on the thread count.
std::vector<DetectorOutcome> run_trials(const SimulationSpec& spec);

struct RocPoint {
  double pf = 0.0;
  double pd = 0.0;
  double threshold = 0.0;
};

/// Operating points with strictly increasing pf; pd is nondecreasing.
struct RocCurve {
  std::vector<RocPoint> points;
};

/// Decision `score > t` swept over every distinct pooled score.
RocCurve empirical_roc(const std::vector<double>& scores_h0, const std::vector<double>& scores_h1);

/// Trapezoid rule over the curve with (0, 0) and (1, 1) appended.
double auc_trapezoid(const RocCurve& roc);

struct AucInputs {
  double a = 0.0;  // (E[W|H0] - E[W|H1]) / sd[W|H1]
  double b = 1.0;  // sd[W|H0] / sd[W|H1]

  static AucInputs from_moments(const detect::HypothesisMoments& m);
};

/// 95% interval for an empirical AUC from n0 negatives and n1 positives (Hanley-McNeil).
Interval auc_interval(double auc, std::uint64_t n0, std::uint64_t n1);

/// Q(a / sqrt(b^2 + 1)).
double auc_closed_form(const AucInputs& in);

/// Closed-form ROC of a Gaussian-CLT statistic sampled at the given false-alarm rates.
RocCurve analytic_roc(const AucInputs& in, const std::vector<double>& pf_grid);

/// Detection rate of the curve at false-alarm rate pf (staircase lookup).
double roc_pd_at(const RocCurve& roc, double pf);

std::uint64_t fnv1a(const std::string& text, std::uint64_t h = 1469598103934665603ULL);

}  // namespace ambc::analysis
