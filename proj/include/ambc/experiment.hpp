#pragma once

// Sweep orchestration and CSV / gnuplot output.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ambc/config.hpp"

namespace ambc::cli {

struct ResultRow {
  double sweep = 0.0;
  std::string detector;
  std::string metric;
  double estimate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::optional<double> closed_form;
  std::string flag = "ok";  // anything else marks a failed point; its numeric cells are empty

  bool ok() const { return flag == "ok"; }
};

struct RunOptions {
  unsigned jobs = 1;     // sweep points evaluated concurrently
  unsigned threads = 1;  // trial threads inside one point
};

/// All rows of one sweep point, in detector order.
std::vector<ResultRow> run_point(const ExperimentConfig& config, double sweep_value, unsigned threads = 1);

/// Rows sorted by sweep value, then by the configured detector order.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Header: sweep,detector,metric,estimate,ci_lo,ci_hi,closed_form,flag
void write_csv(const std::vector<ResultRow>& rows, std::ostream& out);

/// Plot script for the CSV at `csv_path`.
void write_gnuplot(const ExperimentConfig& config, const std::string& csv_path, std::ostream& out);

/// Formats a number the way the CSV does ("%.10g").
std::string format_number(double v);

}  // namespace ambc::cli
