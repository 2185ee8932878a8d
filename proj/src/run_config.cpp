#include "nmq/run_config.hpp"

#include <algorithm>
#include <fstream>

#include "nmq/errors.hpp"

namespace nmq {
namespace {

using nlohmann::json;

double require_number(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_number()) {
    throw ConfigError(std::string("config: missing or non-numeric field '") +
                      key + "'");
  }
  return doc[key].get<double>();
}

double number_or(const json& doc, const char* key, double fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_number()) {
    throw ConfigError(std::string("config: field '") + key +
                      "' must be a number");
  }
  return doc[key].get<double>();
}

SpectralDensityModel parse_density(const json& doc, double temperature) {
  if (!doc.is_object() || !doc.contains("type") || !doc["type"].is_string()) {
    throw ConfigError("config: spectral_density needs a string 'type'");
  }
  const std::string type = doc["type"].get<std::string>();
  SpectralDensityModel model;
  model.temperature = temperature;
  if (type == "lorentzian") {
    LorentzianDensity lor;
    lor.gamma0 = require_number(doc, "gamma0");
    lor.lambda = number_or(doc, "lambda", 1.0);
    lor.delta = number_or(doc, "delta", 0.0);
    model.shape = lor;
  } else if (type == "ohmic") {
    OhmicDensity ohm;
    ohm.eta = number_or(doc, "eta", 1.0);
    ohm.omega_c = number_or(doc, "omega_c", 1.0);
    ohm.s = require_number(doc, "s");
    model.shape = ohm;
  } else if (type == "tabulated") {
    TabulatedDensity tab;
    if (!doc.contains("frequencies") || !doc.contains("values") ||
        !doc["frequencies"].is_array() || !doc["values"].is_array()) {
      throw ConfigError("config: tabulated density needs 'frequencies' and 'values' arrays");
    }
    tab.frequency = doc["frequencies"].get<std::vector<double>>();
    tab.value = doc["values"].get<std::vector<double>>();
    model.shape = tab;
  } else {
    throw ConfigError("config: unknown spectral_density type '" + type + "'");
  }
  model.validate();
  return model;
}

}  // namespace

RunConfig RunConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");

  RunConfig cfg;
  if (!doc.contains("model") || !doc["model"].is_string()) {
    throw ConfigError("config: missing string field 'model'");
  }
  const std::string model = doc["model"].get<std::string>();
  if (model == "jc") {
    cfg.model = ModelKind::jc;
  } else if (model == "dephasing") {
    cfg.model = ModelKind::dephasing;
  } else {
    throw ConfigError("config: model must be 'jc' or 'dephasing'");
  }

  if (!doc.contains("spectral_density")) {
    throw ConfigError("config: missing 'spectral_density'");
  }
  cfg.density =
      parse_density(doc["spectral_density"], number_or(doc, "temperature", 0.0));

  if (!doc.contains("grid") || !doc["grid"].is_object()) {
    throw ConfigError("config: missing object field 'grid'");
  }
  cfg.grid = TimeGrid::from_step(require_number(doc["grid"], "t_max"),
                                 require_number(doc["grid"], "dt"));

  cfg.g_floor = number_or(doc, "g_floor", kDefaultGFloor);
  if (!(cfg.g_floor > 0.0)) throw ConfigError("config: g_floor must be > 0");

  if (doc.contains("pair")) {
    const json& p = doc["pair"];
    PairConfig pc;
    pc.a = number_or(p, "a", 0.0);
    pc.b = complexd{number_or(p, "b_re", 0.0), number_or(p, "b_im", 0.0)};
    cfg.pair = pc;
  }
  if (doc.contains("sweep_pairs")) {
    const json& p = doc["sweep_pairs"];
    SweepPairsConfig sc;
    sc.n_pairs = static_cast<std::size_t>(require_number(p, "n_pairs"));
    sc.seed = static_cast<std::uint64_t>(number_or(p, "seed", 42.0));
    if (sc.n_pairs < 2) throw ConfigError("config: sweep_pairs.n_pairs must be >= 2");
    cfg.sweep_pairs = sc;
  }

  if (doc.contains("epsilon_schedule")) {
    if (!doc["epsilon_schedule"].is_array()) {
      throw ConfigError("config: epsilon_schedule must be an array");
    }
    cfg.epsilon_schedule = doc["epsilon_schedule"].get<std::vector<double>>();
    if (cfg.epsilon_schedule.empty()) {
      throw ConfigError("config: epsilon_schedule must not be empty");
    }
    for (std::size_t i = 0; i < cfg.epsilon_schedule.size(); ++i) {
      if (!(cfg.epsilon_schedule[i] > 0.0) ||
          (i > 0 && !(cfg.epsilon_schedule[i] < cfg.epsilon_schedule[i - 1]))) {
        throw ConfigError("config: epsilon_schedule must be positive and strictly decreasing");
      }
    }
  }

  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string()) {
      throw ConfigError("config: output_dir must be a string");
    }
    cfg.output_dir = doc["output_dir"].get<std::string>();
  }

  if (doc.contains("axes")) {
    if (!doc["axes"].is_array()) throw ConfigError("config: axes must be an array");
    for (const json& axis : doc["axes"]) {
      AxisConfig ax;
      if (!axis.contains("parameter") || !axis["parameter"].is_string() ||
          !axis.contains("values") || !axis["values"].is_array()) {
        throw ConfigError("config: each axis needs 'parameter' and 'values'");
      }
      ax.parameter = axis["parameter"].get<std::string>();
      ax.values = axis["values"].get<std::vector<double>>();
      if (ax.values.empty()) throw ConfigError("config: axis values must not be empty");
      cfg.axes.push_back(std::move(ax));
    }
  }

  if (doc.contains("jobs")) {
    const double j = require_number(doc, "jobs");
    if (!(j >= 1.0)) throw ConfigError("config: jobs must be >= 1");
    cfg.jobs = static_cast<std::size_t>(j);
  }

  cfg.validate_common();
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream stream(path);
  if (!stream.good()) {
    throw ConfigError("config: cannot open '" + path + "'");
  }
  json doc;
  try {
    stream >> doc;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
  return from_json(doc);
}

void RunConfig::set_parameter(const std::string& name, double value) {
  if (auto* lor = std::get_if<LorentzianDensity>(&density.shape)) {
    if (name == "gamma0") { lor->gamma0 = value; return; }
    if (name == "lambda") { lor->lambda = value; return; }
    if (name == "delta") { lor->delta = value; return; }
  }
  if (auto* ohm = std::get_if<OhmicDensity>(&density.shape)) {
    if (name == "eta") { ohm->eta = value; return; }
    if (name == "omega_c") { ohm->omega_c = value; return; }
    if (name == "s") { ohm->s = value; return; }
  }
  if (name == "temperature") { density.temperature = value; return; }
  if (name == "g_floor") {
    if (!(value > 0.0)) throw ConfigError("config: g_floor must be > 0");
    g_floor = value;
    return;
  }
  throw ConfigError("config: unknown sweep parameter '" + name +
                    "' for the configured density");
}

void RunConfig::validate_common() const {
  density.validate();
  if (model == ModelKind::jc &&
      std::holds_alternative<OhmicDensity>(density.shape)) {
    throw ConfigError("config: the jc model needs a lorentzian or tabulated density");
  }
  if (model == ModelKind::dephasing &&
      std::holds_alternative<LorentzianDensity>(density.shape)) {
    throw ConfigError("config: the dephasing model needs an ohmic or tabulated density");
  }
}

void RunConfig::validate_for_run() const {
  validate_common();
  if (pair.has_value() == sweep_pairs.has_value()) {
    throw ConfigError("config: a measure run needs exactly one of 'pair' or 'sweep_pairs'");
  }
  if (pair) {
    const PairParams p{pair->a, pair->b};
    if (p.is_degenerate()) {
      throw ConfigError("config: pair must have a != 0 or b != 0");
    }
    if (pair->a * pair->a + std::norm(pair->b) > 1.0 + 1e-12) {
      throw ConfigError("config: pair must satisfy a^2 + |b|^2 <= 1");
    }
  }
}

void RunConfig::validate_for_sweep() const {
  validate_for_run();
  if (axes.empty() || axes.size() > 2) {
    throw ConfigError("config: sweep needs 1 or 2 axes");
  }
  for (const AxisConfig& ax : axes) {
    RunConfig probe = *this;
    probe.axes.clear();
    probe.set_parameter(ax.parameter, ax.values.front());  // name check
  }
}

PairParams RunConfig::effective_pair() const {
  if (pair) return PairParams{pair->a, pair->b};
  return PairParams{0.0, complexd{1.0, 0.0}};
}

nlohmann::ordered_json RunConfig::echo() const {
  nlohmann::ordered_json doc;
  doc["model"] = model == ModelKind::jc ? "jc" : "dephasing";
  nlohmann::ordered_json dens;
  if (const auto* lor = std::get_if<LorentzianDensity>(&density.shape)) {
    dens["type"] = "lorentzian";
    dens["gamma0"] = lor->gamma0;
    dens["lambda"] = lor->lambda;
    dens["delta"] = lor->delta;
  } else if (const auto* ohm = std::get_if<OhmicDensity>(&density.shape)) {
    dens["type"] = "ohmic";
    dens["eta"] = ohm->eta;
    dens["omega_c"] = ohm->omega_c;
    dens["s"] = ohm->s;
  } else {
    const auto& tab = std::get<TabulatedDensity>(density.shape);
    dens["type"] = "tabulated";
    dens["frequencies"] = tab.frequency;
    dens["values"] = tab.value;
  }
  doc["spectral_density"] = dens;
  doc["temperature"] = density.temperature;
  doc["grid"] = {{"t_max", grid.t_max}, {"dt", grid.dt}};
  doc["g_floor"] = g_floor;
  if (pair) {
    doc["pair"] = {{"a", pair->a}, {"b_re", pair->b.real()}, {"b_im", pair->b.imag()}};
  }
  if (sweep_pairs) {
    doc["sweep_pairs"] = {{"n_pairs", sweep_pairs->n_pairs},
                          {"seed", sweep_pairs->seed}};
  }
  doc["epsilon_schedule"] = epsilon_schedule;
  doc["output_dir"] = output_dir;
  if (!axes.empty()) {
    nlohmann::ordered_json ax_doc = nlohmann::ordered_json::array();
    for (const AxisConfig& ax : axes) {
      ax_doc.push_back({{"parameter", ax.parameter}, {"values", ax.values}});
    }
    doc["axes"] = ax_doc;
  }
  doc["jobs"] = jobs;
  return doc;
}

}  // namespace nmq
