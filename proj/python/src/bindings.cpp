#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "ambc/analysis.hpp"
#include "ambc/config.hpp"
#include "ambc/errors.hpp"
#include "ambc/experiment.hpp"
#include "ambc/specfun.hpp"

namespace py = pybind11;
using namespace ambc;

namespace {

cli::ExperimentConfig prepare(const std::string& config, std::optional<std::uint64_t> seed,
                              std::optional<std::uint64_t> trials) {
  auto c = cli::parse_config(config);
  if (seed) c.seed = *seed;
  if (trials) c.trials = *trials;
  c.validate();
  return c;
}

py::dict to_dict(const cli::ResultRow& r) {
  py::dict d;
  d["sweep"] = r.sweep;
  d["detector"] = r.detector;
  d["metric"] = r.metric;
  d["estimate"] = r.estimate;
  d["ci_lo"] = r.ci_lo;
  d["ci_hi"] = r.ci_hi;
  d["closed_form"] = r.closed_form ? py::object(py::float_(*r.closed_form)) : py::object(py::none());
  d["flag"] = r.flag;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Ambient backscatter detectors (TED, IED, JCED)";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def("q_function", &specfun::q_function, py::arg("x"));
  m.def("q_inverse", &specfun::q_inverse, py::arg("p"));
  m.def("mcleish_abs_moment",
        [](double p, double q, double signal_power, double noise_var) {
          return specfun::mcleish_abs_moment(p, q, signal_power, noise_var);
        },
        py::arg("p"), py::arg("q"), py::arg("signal_power"), py::arg("noise_var"));
  m.def("auc_closed_form", [](double a, double b) { return analysis::auc_closed_form({a, b}); }, py::arg("a"),
        py::arg("b"));
  m.def("ber", &analysis::ber, py::arg("pf"), py::arg("pd"), py::arg("pi0"));

  m.def("default_config",
        [](const std::string& experiment) { return cli::serialize(cli::default_config(cli::experiment_from_string(experiment))); },
        py::arg("experiment") = "pd_vs_ps");
  m.def("validate", [](const std::string& config) { return cli::serialize(cli::parse_config(config)); },
        py::arg("config"));

  // the GIL is released for the Monte Carlo work
  m.def("run",
        [](const std::string& config, std::optional<std::uint64_t> seed, std::optional<std::uint64_t> trials,
           unsigned jobs) {
          const auto c = prepare(config, seed, trials);
          std::vector<cli::ResultRow> rows;
          {
            py::gil_scoped_release release;
            rows = cli::run_experiment(c, {jobs, 1});
          }
          py::list out;
          for (const auto& r : rows) out.append(to_dict(r));
          return out;
        },
        py::arg("config"), py::arg("seed") = py::none(), py::arg("trials") = py::none(), py::arg("jobs") = 1);
  m.def("run_csv",
        [](const std::string& config, std::optional<std::uint64_t> seed, std::optional<std::uint64_t> trials,
           unsigned jobs) {
          const auto c = prepare(config, seed, trials);
          std::ostringstream os;
          {
            py::gil_scoped_release release;
            cli::write_csv(cli::run_experiment(c, {jobs, 1}), os);
          }
          return os.str();
        },
        py::arg("config"), py::arg("seed") = py::none(), py::arg("trials") = py::none(), py::arg("jobs") = 1);
}
