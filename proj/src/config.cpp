#include "ambc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ambc/errors.hpp"

namespace ambc::cli {

using nlohmann::json;

namespace {

struct Name {
  Experiment e;
  const char* name;
  const char* axis;
};

constexpr Name kExperiments[] = {
    {Experiment::Roc, "roc", "pf"},
    {Experiment::PdVsPs, "pd_vs_ps", "ps_dbm"},
    {Experiment::BerVsPs, "ber_vs_ps", "ps_dbm"},
    {Experiment::BerVsXi, "ber_vs_xi", "xi"},
    {Experiment::AucVsPs, "auc_vs_ps", "ps_dbm"},
    {Experiment::PdVsQ, "pd_vs_q", "q"},
    {Experiment::PoptVsPf, "popt_vs_pf", "pf"},
    {Experiment::WeightsVsPf, "weights_vs_pf", "pf"},
    {Experiment::BerVsAntennas, "ber_vs_antennas", "antennas"},
};

template <typename E>
struct EnumName {
  E value;
  const char* name;
};

constexpr EnumName<sysmodel::SignalModel> kSignals[] = {{sysmodel::SignalModel::ConstantUnit, "constant"},
                                                        {sysmodel::SignalModel::IidCscg, "iid_cscg"}};
constexpr EnumName<sysmodel::Fading> kFadings[] = {{sysmodel::Fading::Rayleigh, "rayleigh"},
                                                   {sysmodel::Fading::Rician, "rician"}};
constexpr EnumName<channel::NoiseFamily> kNoises[] = {{channel::NoiseFamily::Cscg, "cscg"},
                                                      {channel::NoiseFamily::McLeish, "mcleish"}};
constexpr EnumName<detect::DetectorKind> kKinds[] = {
    {detect::DetectorKind::Ted, "ted"}, {detect::DetectorKind::Ied, "ied"}, {detect::DetectorKind::Jced, "jced"}};
constexpr EnumName<analysis::ThresholdPolicy> kPolicies[] = {{analysis::ThresholdPolicy::Genie, "genie"},
                                                             {analysis::ThresholdPolicy::Statistical, "statistical"}};
constexpr EnumName<detect::MomentConvention> kConventions[] = {{detect::MomentConvention::Exact, "exact"},
                                                               {detect::MomentConvention::Printed, "printed"}};
constexpr EnumName<ChannelMode> kChannelModes[] = {{ChannelMode::Redraw, "redraw"}, {ChannelMode::Fixed, "fixed"}};

template <typename E, std::size_t K>
const char* name_of(const EnumName<E> (&table)[K], E v) {
  for (const auto& t : table)
    if (t.value == v) return t.name;
  return "?";
}

template <typename E, std::size_t K>
E parse_enum(const EnumName<E> (&table)[K], const json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field, "expected a string");
  const auto s = j.get<std::string>();
  std::string options;
  for (const auto& t : table) {
    if (s == t.name) return t.value;
    options += options.empty() ? t.name : std::string(", ") + t.name;
  }
  throw ConfigError(field, "unknown value '" + s + "' (expected one of: " + options + ")");
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; });
    if (!ok) throw ConfigError(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
  }
}

std::string path(const std::string& where, const char* key) { return where.empty() ? key : where + "." + key; }

double get_number(const json& obj, const std::string& where, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(path(where, key), "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path(where, key), "must be finite");
  return d;
}

std::int64_t get_integer(const json& obj, const std::string& where, const char* key, std::int64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == std::floor(d) && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
  }
  throw ConfigError(path(where, key), "expected an integer");
}

bool get_bool(const json& obj, const std::string& where, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(path(where, key), "expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& where, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(path(where, key), "expected a string");
  return v.get<std::string>();
}

// Distances may be given in meters or kilometers, not both.
double get_distance(const json& obj, const char* meters_key, const char* km_key, double fallback_km) {
  const bool m = obj.contains(meters_key);
  const bool k = obj.contains(km_key);
  if (m && k) throw ConfigError(path("geometry", meters_key), std::string("conflicts with ") + km_key);
  if (m) return get_number(obj, "geometry", meters_key, 0.0) / 1000.0;
  return get_number(obj, "geometry", km_key, fallback_km);
}

ScenarioConfig parse_scenario(const json& j) {
  check_keys(j, "scenario",
             {"ps_dbm", "n", "antennas", "xi", "epsilon", "dic", "pi0", "signal", "fading", "kappa", "noise",
              "apply_pathloss"});
  ScenarioConfig s;
  s.ps_dbm = get_number(j, "scenario", "ps_dbm", s.ps_dbm);
  s.n = static_cast<int>(get_integer(j, "scenario", "n", s.n));
  s.antennas = static_cast<int>(get_integer(j, "scenario", "antennas", s.antennas));
  s.xi = get_number(j, "scenario", "xi", s.xi);
  s.epsilon = get_number(j, "scenario", "epsilon", s.epsilon);
  s.dic = get_bool(j, "scenario", "dic", s.dic);
  s.pi0 = get_number(j, "scenario", "pi0", s.pi0);
  if (j.contains("signal")) s.signal = parse_enum(kSignals, j.at("signal"), "scenario.signal");
  if (j.contains("fading")) s.fading = parse_enum(kFadings, j.at("fading"), "scenario.fading");
  s.kappa = get_number(j, "scenario", "kappa", s.kappa);
  s.apply_pathloss = get_bool(j, "scenario", "apply_pathloss", s.apply_pathloss);
  if (j.contains("noise")) {
    const json& n = j.at("noise");
    check_keys(n, "scenario.noise", {"family", "q"});
    if (n.contains("family")) s.noise_family = parse_enum(kNoises, n.at("family"), "scenario.noise.family");
    s.q = get_number(n, "scenario.noise", "q", s.q);
  }
  return s;
}

channel::GeometryConfig parse_geometry(const json& j) {
  check_keys(j, "geometry",
             {"d_sr_m", "d_st_m", "d_tr_m", "d_sr_km", "d_st_km", "d_tr_km", "freq_mhz", "gain_source_db",
              "gain_reader_db", "gain_tag_db", "bandwidth_hz", "noise_density_dbm_hz"});
  channel::GeometryConfig g;
  g.d_sr_km = get_distance(j, "d_sr_m", "d_sr_km", g.d_sr_km);
  g.d_st_km = get_distance(j, "d_st_m", "d_st_km", g.d_st_km);
  g.d_tr_km = get_distance(j, "d_tr_m", "d_tr_km", g.d_tr_km);
  g.freq_mhz = get_number(j, "geometry", "freq_mhz", g.freq_mhz);
  g.gain_source_db = get_number(j, "geometry", "gain_source_db", g.gain_source_db);
  g.gain_reader_db = get_number(j, "geometry", "gain_reader_db", g.gain_reader_db);
  g.gain_tag_db = get_number(j, "geometry", "gain_tag_db", g.gain_tag_db);
  g.bandwidth_hz = get_number(j, "geometry", "bandwidth_hz", g.bandwidth_hz);
  g.noise_density_dbm_hz = get_number(j, "geometry", "noise_density_dbm_hz", g.noise_density_dbm_hz);
  return g;
}

detect::DetectorConfig parse_detector(const json& j, const std::string& where) {
  check_keys(j, where, {"kind", "p", "alpha", "pf", "optimize", "id"});
  detect::DetectorConfig d;
  if (!j.contains("kind")) throw ConfigError(where + ".kind", "missing detector kind");
  d.kind = parse_enum(kKinds, j.at("kind"), where + ".kind");
  d.p = get_number(j, where, "p", d.p);
  d.weights = detect::JcedWeights::from_alpha(get_number(j, where, "alpha", d.weights.alpha));
  d.target_pf = get_number(j, where, "pf", d.target_pf);
  d.optimize = get_bool(j, where, "optimize", d.optimize);
  d.id = get_string(j, where, "id", d.id);
  if (d.kind == detect::DetectorKind::Ted && j.contains("p")) throw ConfigError(where + ".p", "TED has no exponent");
  return d;
}

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  // nlohmann reports the byte after the offending character
  if (col > 1) --col;
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

const char* to_string(Experiment e) {
  for (const auto& n : kExperiments)
    if (n.e == e) return n.name;
  return "?";
}

Experiment experiment_from_string(const std::string& name) {
  std::string options;
  for (const auto& n : kExperiments) {
    if (name == n.name) return n.e;
    options += options.empty() ? n.name : std::string(", ") + n.name;
  }
  throw ConfigError("experiment", "unknown experiment '" + name + "' (expected one of: " + options + ")");
}

const char* sweep_axis(Experiment e) {
  for (const auto& n : kExperiments)
    if (n.e == e) return n.axis;
  return "?";
}

std::vector<double> default_sweep(Experiment e) {
  switch (e) {
    case Experiment::Roc:
      return {0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99};
    case Experiment::PdVsPs:
    case Experiment::BerVsPs:
    case Experiment::AucVsPs:
      return {-20, -15, -10, -5, 0, 5, 10, 15, 20};
    case Experiment::BerVsXi:
      return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    case Experiment::PdVsQ:
      return {0.5, 1, 2, 5, 10, 100};
    case Experiment::PoptVsPf:
    case Experiment::WeightsVsPf:
      return {0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
    case Experiment::BerVsAntennas:
      return {1, 2, 4, 8};
  }
  return {};
}

std::vector<detect::DetectorConfig> default_detectors(Experiment e) {
  detect::DetectorConfig ted;
  ted.kind = detect::DetectorKind::Ted;
  detect::DetectorConfig ied;
  ied.kind = detect::DetectorKind::Ied;
  ied.optimize = true;
  detect::DetectorConfig jced;
  jced.kind = detect::DetectorKind::Jced;
  jced.optimize = true;
  if (e == Experiment::PoptVsPf) return {ied};
  if (e == Experiment::WeightsVsPf) return {jced};
  return {ted, ied, jced};
}

ExperimentConfig default_config(Experiment e) {
  ExperimentConfig c;
  c.experiment = e;
  c.sweep = default_sweep(e);
  c.detectors = default_detectors(e);
  return c;
}

std::string ExperimentConfig::output_name() const {
  return output.empty() ? std::string(to_string(experiment)) + ".csv" : output;
}

void ExperimentConfig::validate() const {
  const auto& s = scenario;
  if (s.n < 2) throw ConfigError("scenario.n", "need at least 2 samples per symbol");
  if (s.antennas < 1) throw ConfigError("scenario.antennas", "need at least one antenna");
  if (!(s.xi > 0.0 && s.xi <= 1.0)) throw ConfigError("scenario.xi", "must lie in (0, 1]");
  if (!(s.epsilon >= 0.0 && s.epsilon <= 1.0)) throw ConfigError("scenario.epsilon", "must lie in [0, 1]");
  if (!(s.pi0 > 0.0 && s.pi0 < 1.0)) throw ConfigError("scenario.pi0", "must lie in (0, 1)");
  if (!(s.kappa >= 0.0)) throw ConfigError("scenario.kappa", "must be >= 0");
  if (!(s.q > 0.0)) throw ConfigError("scenario.noise.q", "must be positive");
  if (!std::isfinite(s.ps_dbm)) throw ConfigError("scenario.ps_dbm", "must be finite");
  try {
    geometry.validate();
  } catch (const DomainError& e) {
    throw ConfigError("geometry", e.what());
  }
  if (trials < 1) throw ConfigError("trials", "need at least one trial");
  if (sweep.empty()) throw ConfigError("sweep", "needs at least one value");
  for (std::size_t i = 1; i < sweep.size(); ++i)
    if (!(sweep[i] > sweep[i - 1])) throw ConfigError("sweep", "values must be strictly increasing");
  for (double v : sweep) {
    if (!std::isfinite(v)) throw ConfigError("sweep", "values must be finite");
    switch (experiment) {
      case Experiment::Roc:
      case Experiment::PoptVsPf:
      case Experiment::WeightsVsPf:
        if (!(v > 0.0 && v < 1.0)) throw ConfigError("sweep", "false-alarm rates must lie in (0, 1)");
        break;
      case Experiment::BerVsXi:
        if (!(v > 0.0 && v <= 1.0)) throw ConfigError("sweep", "xi values must lie in (0, 1]");
        break;
      case Experiment::PdVsQ:
        if (!(v > 0.0)) throw ConfigError("sweep", "q values must be positive");
        break;
      case Experiment::BerVsAntennas:
        if (!(v >= 1.0) || v != std::floor(v) || v > 1024) throw ConfigError("sweep", "antenna counts must be integers >= 1");
        break;
      default:
        break;
    }
  }
  if (detectors.empty()) throw ConfigError("detectors", "needs at least one detector");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < detectors.size(); ++i) {
    const std::string where = "detectors[" + std::to_string(i) + "]";
    try {
      detectors[i].validate();
    } catch (const ConfigError& e) {
      throw ConfigError(where + "." + e.field(), e.what());
    }
    if (!labels.insert(detectors[i].label()).second) throw ConfigError(where + ".id", "duplicate detector label");
  }
  auto has = [&](detect::DetectorKind k) {
    return std::any_of(detectors.begin(), detectors.end(), [&](const auto& d) { return d.kind == k; });
  };
  if (experiment == Experiment::PoptVsPf && !has(detect::DetectorKind::Ied))
    throw ConfigError("detectors", "popt_vs_pf needs an IED detector");
  if (experiment == Experiment::WeightsVsPf && !has(detect::DetectorKind::Jced))
    throw ConfigError("detectors", "weights_vs_pf needs a JCED detector");
  if (output.find('/') != std::string::npos) throw ConfigError("output", "must be a file name; use --out for the directory");
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json j;
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return default_config(Experiment::PdVsPs);
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", source + ": parse error at " + line_col(text, e.byte) + ": " + e.what());
  }
  if (j.is_null()) j = json::object();
  check_keys(j, "",
             {"experiment", "scenario", "geometry", "sweep", "detectors", "trials", "seed", "output",
              "threshold_policy", "convention", "channel"});

  const Experiment e = j.contains("experiment")
                           ? experiment_from_string(get_string(j, "", "experiment", ""))
                           : Experiment::PdVsPs;
  ExperimentConfig c = default_config(e);
  if (j.contains("scenario")) c.scenario = parse_scenario(j.at("scenario"));
  if (j.contains("geometry")) c.geometry = parse_geometry(j.at("geometry"));
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    if (!s.is_array()) throw ConfigError("sweep", "expected an array of numbers");
    c.sweep.clear();
    for (const auto& v : s) {
      if (!v.is_number()) throw ConfigError("sweep", "expected an array of numbers");
      c.sweep.push_back(v.get<double>());
    }
  }
  if (j.contains("detectors")) {
    const json& d = j.at("detectors");
    if (!d.is_array()) throw ConfigError("detectors", "expected an array of detector objects");
    c.detectors.clear();
    for (std::size_t i = 0; i < d.size(); ++i)
      c.detectors.push_back(parse_detector(d[i], "detectors[" + std::to_string(i) + "]"));
  }
  const std::int64_t trials = get_integer(j, "", "trials", static_cast<std::int64_t>(c.trials));
  if (trials < 1) throw ConfigError("trials", "need at least one trial");
  c.trials = static_cast<std::uint64_t>(trials);
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
      throw ConfigError("seed", "expected a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  c.output = get_string(j, "", "output", c.output);
  if (j.contains("threshold_policy")) c.threshold_policy = parse_enum(kPolicies, j.at("threshold_policy"), "threshold_policy");
  if (j.contains("convention")) c.convention = parse_enum(kConventions, j.at("convention"), "convention");
  if (j.contains("channel")) c.channel = parse_enum(kChannelModes, j.at("channel"), "channel");
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string serialize(const ExperimentConfig& c) {
  json j;
  j["experiment"] = to_string(c.experiment);
  const auto& s = c.scenario;
  j["scenario"] = {{"ps_dbm", s.ps_dbm},
                   {"n", s.n},
                   {"antennas", s.antennas},
                   {"xi", s.xi},
                   {"epsilon", s.epsilon},
                   {"dic", s.dic},
                   {"pi0", s.pi0},
                   {"signal", name_of(kSignals, s.signal)},
                   {"fading", name_of(kFadings, s.fading)},
                   {"kappa", s.kappa},
                   {"noise", {{"family", name_of(kNoises, s.noise_family)}, {"q", s.q}}},
                   {"apply_pathloss", s.apply_pathloss}};
  const auto& g = c.geometry;
  j["geometry"] = {{"d_sr_km", g.d_sr_km},
                   {"d_st_km", g.d_st_km},
                   {"d_tr_km", g.d_tr_km},
                   {"freq_mhz", g.freq_mhz},
                   {"gain_source_db", g.gain_source_db},
                   {"gain_reader_db", g.gain_reader_db},
                   {"gain_tag_db", g.gain_tag_db},
                   {"bandwidth_hz", g.bandwidth_hz},
                   {"noise_density_dbm_hz", g.noise_density_dbm_hz}};
  j["sweep"] = c.sweep;
  j["detectors"] = json::array();
  for (const auto& d : c.detectors) {
    json dj = {{"kind", name_of(kKinds, d.kind)}, {"pf", d.target_pf}, {"optimize", d.optimize}};
    if (d.kind == detect::DetectorKind::Ied) dj["p"] = d.p;
    if (d.kind == detect::DetectorKind::Jced) dj["alpha"] = d.weights.alpha;
    if (!d.id.empty()) dj["id"] = d.id;
    j["detectors"].push_back(dj);
  }
  j["trials"] = c.trials;
  if (c.seed) j["seed"] = *c.seed;
  if (!c.output.empty()) j["output"] = c.output;
  j["threshold_policy"] = name_of(kPolicies, c.threshold_policy);
  j["convention"] = name_of(kConventions, c.convention);
  j["channel"] = name_of(kChannelModes, c.channel);
  return j.dump(2) + "\n";
}

channel::LinkBudget link_budget(const ExperimentConfig& c) {
  if (c.scenario.apply_pathloss) return channel::build_link_budget(c.geometry);
  return channel::LinkBudget{1.0, 1.0, 1.0, 1e-3};
}

sysmodel::ScenarioParams scenario_at(const ExperimentConfig& c, double v) {
  const auto& s = c.scenario;
  sysmodel::ScenarioParams p;
  p.ps_watts = channel::dbm_to_watts(s.ps_dbm);
  p.n = s.n;
  p.m = s.antennas;
  p.xi = s.xi;
  p.epsilon = s.epsilon;
  p.dic = s.dic;
  p.pi0 = s.pi0;
  p.signal = s.signal;
  p.fading = s.fading;
  p.kappa = s.kappa;
  p.noise.family = s.noise_family;
  p.noise.q = s.q;
  p.noise.variance = link_budget(c).noise_power;
  switch (c.experiment) {
    case Experiment::PdVsPs:
    case Experiment::BerVsPs:
    case Experiment::AucVsPs:
      p.ps_watts = channel::dbm_to_watts(v);
      break;
    case Experiment::BerVsXi:
      p.xi = v;
      break;
    case Experiment::PdVsQ:
      p.noise.family = channel::NoiseFamily::McLeish;
      p.noise.q = v;
      break;
    case Experiment::BerVsAntennas:
      p.m = static_cast<int>(v);
      break;
    case Experiment::Roc:
    case Experiment::PoptVsPf:
    case Experiment::WeightsVsPf:
      break;
  }
  p.validate();
  return p;
}

}  // namespace ambc::cli
