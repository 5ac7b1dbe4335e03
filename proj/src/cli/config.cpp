#include "cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "orbitinv/expr.hpp"

namespace orbitinv::cli {

using nlohmann::json;

namespace {

const char* type_name(const json& j) { return j.type_name(); }

// Reads the members of one JSON object and rejects whatever it did not ask for.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(where() + ": expected an object, got " + type_name(obj_));
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  bool number(const std::string& key, double& out) {
    const json* j = find(key);
    if (!j) return false;
    if (!j->is_number()) throw ConfigError(where(key) + ": expected a number, got " + type_name(*j));
    out = j->get<double>();
    if (!std::isfinite(out)) throw ConfigError(where(key) + ": must be finite");
    return true;
  }

  bool count(const std::string& key, std::size_t& out) {
    const json* j = find(key);
    if (!j) return false;
    if (!j->is_number_integer() || j->get<long long>() < 0) {
      throw ConfigError(where(key) + ": expected a non-negative integer");
    }
    out = j->get<std::size_t>();
    return true;
  }

  bool string(const std::string& key, std::string& out) {
    const json* j = find(key);
    if (!j) return false;
    if (!j->is_string()) throw ConfigError(where(key) + ": expected a string, got " + type_name(*j));
    out = j->get<std::string>();
    return true;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(where(it.key()) + ": unknown key");
    }
  }

  std::string where(const std::string& key = {}) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void require_positive(double v, const std::string& what) {
  if (!(v > 0.0)) throw ConfigError(what + " must be positive");
}

PhaseState state_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) throw ConfigError(where + ": expected [x, y, p, r]");
  StateVec v{};
  for (std::size_t k = 0; k < 4; ++k) {
    if (!j[k].is_number()) throw ConfigError(where + ": components must be numbers");
    v[k] = j[k].get<double>();
  }
  return PhaseState::from(v, 0.0);
}

}  // namespace

double ScanAxis::value(std::size_t k) const {
  if (count <= 1) return min;
  return min + (max - min) * static_cast<double>(k) / static_cast<double>(count - 1);
}

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  ObjectReader top(doc, "");

  const json* version = top.find("version");
  if (!version) throw ConfigError("version: missing");
  if (!version->is_number_integer() || version->get<long long>() != kConfigVersion) {
    throw ConfigError("version: unsupported (expected " + std::to_string(kConfigVersion) + ")");
  }

  if (const json* sys = top.find("system")) {
    ObjectReader r(*sys, "system");
    r.string("name", cfg.system.name);
    r.string("U", cfg.system.potential);
    r.string("psi", cfg.system.stream);
    if (const json* params = r.find("params")) {
      if (!params->is_object()) throw ConfigError("system.params: expected an object");
      for (auto it = params->begin(); it != params->end(); ++it) {
        if (!it.value().is_number()) throw ConfigError("system.params." + it.key() + ": expected a number");
        cfg.system.params[it.key()] = it.value().get<double>();
      }
    }
    r.finish();
  } else {
    throw ConfigError("system: missing");
  }

  if (const json* integ = top.find("integrator")) {
    ObjectReader r(*integ, "integrator");
    r.number("rtol", cfg.integrator.rtol);
    r.number("atol", cfg.integrator.atol);
    r.number("initial_step", cfg.integrator.initial_step);
    r.number("max_step", cfg.integrator.max_step);
    r.count("max_steps", cfg.integrator.max_steps);
    r.finish();
  }

  if (const json* sec = top.find("section")) {
    ObjectReader r(*sec, "section");
    r.number("offset", cfg.section.offset);
    double dir = cfg.section.direction;
    if (r.number("direction", dir)) {
      if (dir != 1.0 && dir != -1.0) throw ConfigError("section.direction: must be 1 or -1");
      cfg.section.direction = static_cast<int>(dir);
    }
    r.finish();
  }

  if (const json* cls = top.find("classification")) {
    ObjectReader r(*cls, "classification");
    std::size_t max_den = cfg.classification.max_den;
    if (r.count("max_den", max_den)) cfg.classification.max_den = static_cast<unsigned>(max_den);
    r.number("tol", cfg.classification.tol);
    r.count("samples", cfg.classification.samples);
    r.number("horizon", cfg.classification.horizon);
    r.finish();
  }

  top.number("orbit_tol", cfg.orbit_tol);
  top.number("invariant_tol", cfg.invariant_tol);
  top.count("resolution", cfg.resolution);
  top.string("output_dir", cfg.output_dir);
  if (const json* s = top.find("initial_state")) cfg.initial_state = state_from_json(*s, "initial_state");
  double v = 0.0;
  if (top.number("t_end", v)) cfg.t_end = v;
  if (top.number("seed_period", v)) cfg.seed_period = v;
  if (top.number("output_dt", v)) cfg.output_dt = v;

  if (const json* scan = top.find("scan")) {
    ObjectReader r(*scan, "scan");
    const json* axes = r.find("axes");
    if (!axes || !axes->is_array()) throw ConfigError("scan.axes: expected an array");
    for (std::size_t k = 0; k < axes->size(); ++k) {
      ObjectReader ar((*axes)[k], "scan.axes[" + std::to_string(k) + "]");
      ScanAxis axis;
      if (!ar.string("name", axis.name)) throw ConfigError(ar.where("name") + ": missing");
      if (!ar.number("min", axis.min)) throw ConfigError(ar.where("min") + ": missing");
      axis.max = axis.min;
      ar.number("max", axis.max);
      ar.count("count", axis.count);
      ar.finish();
      cfg.scan.push_back(axis);
    }
    r.finish();
  }
  top.finish();

  cfg.validate();
  return cfg;
}

void RunConfig::validate() const {
  try {
    integrator.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("integrator: ") + e.what());
  }
  require_positive(classification.tol, "classification.tol");
  if (classification.max_den < 1) throw ConfigError("classification.max_den must be >= 1");
  if (classification.samples < 1024 || (classification.samples & (classification.samples - 1)) != 0) {
    throw ConfigError("classification.samples must be a power of two >= 1024");
  }
  require_positive(classification.horizon, "classification.horizon");
  require_positive(orbit_tol, "orbit_tol");
  require_positive(invariant_tol, "invariant_tol");
  if (resolution < 32) throw ConfigError("resolution must be >= 32");
  if (t_end) require_positive(*t_end, "t_end");
  if (seed_period) require_positive(*seed_period, "seed_period");
  if (output_dt) require_positive(*output_dt, "output_dt");
  if (initial_state && !initial_state->finite()) throw ConfigError("initial_state must be finite");

  if (scan.size() > 2) throw ConfigError("scan: at most two axes");
  for (const auto& axis : scan) {
    if (axis.count < 1) throw ConfigError("scan axis '" + axis.name + "': count must be >= 1");
    if (axis.is_state()) {
      const std::string c = axis.name.substr(6);
      if (c != "x" && c != "y" && c != "p" && c != "r") {
        throw ConfigError("scan axis '" + axis.name + "': unknown state component");
      }
    } else if (!system.params.count(axis.name)) {
      throw ConfigError("scan axis '" + axis.name + "': not a system parameter");
    }
  }
  make_system();
}

SystemSpec RunConfig::make_system(const ParameterMap& overrides) const {
  ParameterMap params = system.params;
  for (const auto& [k, v] : overrides) params[k] = v;
  try {
    return SystemSpec::from_text(system.name, system.potential, system.stream, params);
  } catch (const ParseError& e) {
    throw ConfigError(std::string("system expression: parse error at ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("system expression: ") + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
  json j;
  j["version"] = kConfigVersion;
  j["system"] = {{"name", cfg.system.name}, {"U", cfg.system.potential}, {"psi", cfg.system.stream},
                 {"params", json::object()}};
  for (const auto& [k, v] : cfg.system.params) j["system"]["params"][k] = v;
  j["integrator"] = {{"rtol", cfg.integrator.rtol},
                     {"atol", cfg.integrator.atol},
                     {"initial_step", cfg.integrator.initial_step},
                     {"max_steps", cfg.integrator.max_steps}};
  if (std::isfinite(cfg.integrator.max_step)) j["integrator"]["max_step"] = cfg.integrator.max_step;
  j["section"] = {{"offset", cfg.section.offset}, {"direction", cfg.section.direction}};
  j["classification"] = {{"max_den", cfg.classification.max_den},
                         {"tol", cfg.classification.tol},
                         {"samples", cfg.classification.samples},
                         {"horizon", cfg.classification.horizon}};
  j["orbit_tol"] = cfg.orbit_tol;
  j["invariant_tol"] = cfg.invariant_tol;
  j["resolution"] = cfg.resolution;
  j["output_dir"] = cfg.output_dir;
  if (cfg.initial_state) {
    const auto& s = *cfg.initial_state;
    j["initial_state"] = {s.x, s.y, s.p, s.r};
  }
  if (cfg.t_end) j["t_end"] = *cfg.t_end;
  if (cfg.seed_period) j["seed_period"] = *cfg.seed_period;
  if (cfg.output_dt) j["output_dt"] = *cfg.output_dt;
  if (!cfg.scan.empty()) {
    json axes = json::array();
    for (const auto& a : cfg.scan) axes.push_back({{"name", a.name}, {"min", a.min}, {"max", a.max}, {"count", a.count}});
    j["scan"] = {{"axes", axes}};
  }
  return j;
}

PhaseState parse_state(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double d = 0.0;
    try {
      d = std::stod(cell, &used);
    } catch (const std::exception&) {
      throw ConfigError("--state: '" + cell + "' is not a number");
    }
    if (cell.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(d)) {
      throw ConfigError("--state: '" + cell + "' is not a number");
    }
    v.push_back(d);
  }
  if (v.size() != 4) throw ConfigError("--state: expected four values x,y,p,r");
  return PhaseState{v[0], v[1], v[2], v[3], 0.0};
}

}  // namespace orbitinv::cli
