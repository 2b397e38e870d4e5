#include "ambc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include "ambc/analysis.hpp"
#include "ambc/errors.hpp"
#include "ambc/specfun.hpp"

namespace ambc::cli {

namespace {

using analysis::DetectorOutcome;

ResultRow row(double sweep, const std::string& det, const char* metric, double est, analysis::Interval ci,
              std::optional<double> cf) {
  return {sweep, det, metric, est, ci.lo, ci.hi, cf, "ok"};
}

ResultRow exact_row(double sweep, const std::string& det, const char* metric, double v) {
  return {sweep, det, metric, v, v, v, v, "ok"};
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = c == ',' ? ';' : ' ';
  return s;
}

std::vector<ResultRow> error_rows(const ExperimentConfig& c, double sweep, const std::string& what) {
  std::vector<ResultRow> out;
  for (const auto& d : c.detectors) {
    ResultRow r;
    r.sweep = sweep;
    r.detector = d.label();
    r.metric = "error";
    r.flag = "error: " + sanitize(what);
    out.push_back(r);
  }
  return out;
}

analysis::SimulationSpec base_spec(const ExperimentConfig& c, const sysmodel::ScenarioParams& params, unsigned threads) {
  analysis::SimulationSpec spec;
  spec.scenario = params;
  spec.budget = link_budget(c);
  spec.detectors = c.detectors;
  spec.trials = c.trials;
  spec.seed = c.seed.value_or(0);
  spec.threshold_policy = c.threshold_policy;
  spec.convention = c.convention;
  spec.threads = threads;
  if (c.channel == ChannelMode::Fixed) {
    // Stream 0 is never used by a trial.
    Rng rng(spec.seed, 0);
    spec.fixed_channel = sysmodel::generate_realization(params, spec.budget, rng);
  }
  return spec;
}

void parameter_rows(std::vector<ResultRow>& out, double sweep, const DetectorOutcome& o) {
  const auto& d = o.config;
  if (!d.optimize) return;
  if (d.kind == detect::DetectorKind::Ied) out.push_back(exact_row(sweep, d.label(), "p_opt", d.p));
  if (d.kind == detect::DetectorKind::Jced) out.push_back(exact_row(sweep, d.label(), "alpha_opt", d.weights.alpha));
}

std::vector<ResultRow> roc_rows(const ExperimentConfig& c, unsigned threads) {
  const auto params = scenario_at(c, 0.0);
  auto spec = base_spec(c, params, threads);
  spec.keep_scores = true;
  spec.roc_pf_grid = c.sweep;
  const auto outcomes = analysis::run_trials(spec);
  std::vector<ResultRow> out;
  for (std::size_t g = 0; g < c.sweep.size(); ++g) {
    const double pf = c.sweep[g];
    const double z = specfun::q_inverse(pf);
    for (const auto& o : outcomes) {
      auto count = [z](const std::vector<double>& s) {
        return static_cast<std::uint64_t>(std::count_if(s.begin(), s.end(), [z](double v) { return v > z; }));
      };
      const auto fa = analysis::Proportion::from_counts(count(o.scores_h0), o.scores_h0.size());
      const auto det = analysis::Proportion::from_counts(count(o.scores_h1), o.scores_h1.size());
      out.push_back(row(pf, o.config.label(), "pf", fa.estimate, fa.ci, pf));
      out.push_back(row(pf, o.config.label(), "pd", det.estimate, det.ci, o.closed_form_roc_pd[g]));
    }
  }
  return out;
}

std::vector<ResultRow> optimizer_rows(const ExperimentConfig& c, double pf) {
  const auto params = scenario_at(c, pf);
  const auto in = detect::statistical_inputs(params, link_budget(c), c.convention);
  std::vector<ResultRow> out;
  for (const auto& d : c.detectors) {
    if (c.experiment == Experiment::PoptVsPf && d.kind == detect::DetectorKind::Ied) {
      const auto r = detect::optimize_p(in, pf);
      out.push_back(exact_row(pf, d.label(), "p_opt", r.p));
      out.push_back(exact_row(pf, d.label(), "pd", r.pd));
    }
    if (c.experiment == Experiment::WeightsVsPf && d.kind == detect::DetectorKind::Jced) {
      const auto r = detect::optimize_weights(in, pf);
      out.push_back(exact_row(pf, d.label(), "alpha", r.weights.alpha));
      out.push_back(exact_row(pf, d.label(), "beta", r.weights.beta));
      out.push_back(exact_row(pf, d.label(), "beta_over_alpha", r.weights.beta / r.weights.alpha));
      out.push_back(exact_row(pf, d.label(), "pd", r.pd));
    }
  }
  return out;
}

std::vector<ResultRow> trial_rows(const ExperimentConfig& c, double v, unsigned threads) {
  const auto params = scenario_at(c, v);
  auto spec = base_spec(c, params, threads);
  const bool auc = c.experiment == Experiment::AucVsPs;
  spec.keep_scores = auc;
  const auto outcomes = analysis::run_trials(spec);
  std::optional<detect::MomentInputs> stat;
  std::vector<ResultRow> out;
  for (const auto& o : outcomes) {
    const auto& s = o.summary;
    const std::string id = o.config.label();
    parameter_rows(out, v, o);
    out.push_back(row(v, id, "pf", s.pf.estimate, s.pf.ci, s.closed_form_pf));
    out.push_back(row(v, id, "pd", s.pd.estimate, s.pd.ci, s.closed_form_pd));
    out.push_back(row(v, id, "ber", s.ber.estimate, s.ber.ci, s.closed_form_ber));
    if (auc) {
      if (!stat) stat = detect::statistical_inputs(params, spec.budget, c.convention);
      const double a = analysis::auc_trapezoid(analysis::empirical_roc(o.scores_h0, o.scores_h1));
      const double cf =
          analysis::auc_closed_form(analysis::AucInputs::from_moments(detect::moments(o.config, *stat)));
      out.push_back(row(v, id, "auc", a, analysis::auc_interval(a, o.scores_h0.size(), o.scores_h1.size()), cf));
    }
  }
  return out;
}

}  // namespace

std::vector<ResultRow> run_point(const ExperimentConfig& c, double v, unsigned threads) {
  try {
    switch (c.experiment) {
      case Experiment::Roc:
        return roc_rows(c, threads);
      case Experiment::PoptVsPf:
      case Experiment::WeightsVsPf:
        return optimizer_rows(c, v);
      default:
        return trial_rows(c, v, threads);
    }
  } catch (const std::exception& e) {
    return error_rows(c, v, e.what());
  }
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& c, const RunOptions& options) {
  c.validate();
  if (!c.seed) throw ConfigError("seed", "a seed is required to run an experiment (config key or --seed)");
  // The ROC comes from one simulation covering every false-alarm rate.
  const std::vector<double> points = c.experiment == Experiment::Roc ? std::vector<double>{0.0} : c.sweep;
  std::vector<std::vector<ResultRow>> results(points.size());
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(points.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) results[i] = run_point(c, points[i], options.threads);
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::vector<ResultRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << "sweep,detector,metric,estimate,ci_lo,ci_hi,closed_form,flag\n";
  for (const auto& r : rows) {
    out << format_number(r.sweep) << ',' << r.detector << ',' << r.metric << ',';
    if (r.ok()) {
      out << format_number(r.estimate) << ',' << format_number(r.ci_lo) << ',' << format_number(r.ci_hi) << ',';
      if (r.closed_form && std::isfinite(*r.closed_form)) out << format_number(*r.closed_form);
    } else {
      out << ",,,";
    }
    out << ',' << r.flag << '\n';
  }
}

void write_gnuplot(const ExperimentConfig& c, const std::string& csv_path, std::ostream& out) {
  const char* metric = "pd";
  bool logy = false;
  switch (c.experiment) {
    case Experiment::BerVsPs:
    case Experiment::BerVsXi:
    case Experiment::BerVsAntennas:
      metric = "ber";
      logy = true;
      break;
    case Experiment::AucVsPs:
      metric = "auc";
      break;
    case Experiment::PoptVsPf:
      metric = "p_opt";
      break;
    case Experiment::WeightsVsPf:
      metric = "beta_over_alpha";
      break;
    default:
      break;
  }
  std::string labels;
  for (const auto& d : c.detectors) labels += (labels.empty() ? "" : " ") + d.label();
  out << "# plot " << metric << " against " << sweep_axis(c.experiment) << " from " << csv_path << "\n";
  out << "set datafile separator ','\n";
  out << "set key outside right\n";
  out << "set grid\n";
  out << "set xlabel '" << (c.experiment == Experiment::Roc ? "P_F" : sweep_axis(c.experiment)) << "'\n";
  out << "set ylabel '" << (c.experiment == Experiment::Roc ? "P_D" : metric) << "'\n";
  if (logy) out << "set logscale y\n";
  out << "file = '" << csv_path << "'\n";
  out << "dets = \"" << labels << "\"\n";
  out << "plot for [d in dets] file using (strcol(2) eq d && strcol(3) eq '" << metric
      << "' ? $1 : NaN):4 with linespoints title d, \\\n";
  out << "     for [d in dets] file using (strcol(2) eq d && strcol(3) eq '" << metric
      << "' ? $1 : NaN):7 with lines dashtype 2 title d.' closed form'\n";
}

}  // namespace ambc::cli
