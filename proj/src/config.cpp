#include "chatter/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "chatter/expression.hpp"

namespace chatter {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

double parse_number(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw SchemaError(key, "expected a number, got '" + value + "'");
  }
}

long parse_integer(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw SchemaError(key, "expected an integer, got '" + value + "'");
  }
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "model", "field", "guard", "phi", "X0", "omega", "r", "x0", "v0", "t0",
      "t_end", "rel_tol", "abs_tol", "event_tol", "zeno_dt", "v_stick", "impact_cap",
      "control_C", "control_tau", "out_trace", "out_report", "format"};
  return keys;
}

bool model_declares(const std::string& model, const std::string& key) {
  for (const auto& spec : catalog()) {
    if (spec.name != model) continue;
    for (const auto& p : spec.params)
      if (p.name == key) return true;
    // Aliases accepted by instantiate for the four-state / controlled models.
    if (key == "x0" || key == "v0") return true;
  }
  return false;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  // First pass: collect raw key/value pairs.
  std::map<std::string, std::string> raw;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line == "{" || line == "}" || line.empty()) continue;
    if (line.back() == ',') line.pop_back();

    const std::size_t eq = line.find_first_of("=:");
    if (eq == std::string::npos)
      throw SchemaError(trim(line), "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = unquote(trim(line.substr(eq + 1)));
    if (key.empty()) throw SchemaError(line, "empty key");
    if (raw.count(key)) throw SchemaError(key, "duplicate key");
    raw[key] = value;
  }

  RunConfig cfg;
  const auto model_it = raw.find("model");
  const std::string model = model_it != raw.end() ? model_it->second : "";

  for (const auto& [key, value] : raw) {
    if (!known_keys().count(key) && !(model.size() && model_declares(model, key)))
      throw SchemaError(key, "unknown key");
  }

  if (raw.count("model") && raw.count("field"))
    throw SchemaError("model", "exactly one of {model, field} may be present");
  if (!raw.count("model") && !raw.count("field"))
    throw SchemaError("model", "exactly one of {model, field} must be present");

  for (const auto& [key, value] : raw) {
    if (key == "model") {
      cfg.model = value;
    } else if (key == "field") {
      cfg.field_text = value;
    } else if (key == "guard") {
      if (value != "fixed" && value != "sinusoidal")
        throw SchemaError(key, "must be 'fixed' or 'sinusoidal'");
      cfg.guard_kind = value;
    } else if (key == "format") {
      if (value != "csv" && value != "json")
        throw SchemaError(key, "must be 'csv' or 'json'");
      cfg.format = value;
    } else if (key == "out_trace") {
      cfg.out_trace = value;
    } else if (key == "out_report") {
      cfg.out_report = value;
    } else if (key == "impact_cap") {
      if (value == "auto") cfg.cap_mode = CapMode::automatic;
      else if (value == "none") cfg.cap_mode = CapMode::none;
      else {
        cfg.cap_mode = CapMode::fixed_count;
        cfg.cap_count = parse_integer(key, value);
        if (cfg.cap_count <= 0) throw SchemaError(key, "cap must be positive");
      }
    } else if (key == "rel_tol") {
      cfg.step.rel_tol = parse_number(key, value);
    } else if (key == "abs_tol") {
      cfg.step.abs_tol = parse_number(key, value);
    } else if (key == "event_tol") {
      cfg.step.event_tol = parse_number(key, value);
    } else if (key == "zeno_dt") {
      cfg.zeno.min_gap = parse_number(key, value);
    } else if (key == "v_stick") {
      cfg.zeno.stick_speed = parse_number(key, value);
    } else if (key == "control_C") {
      cfg.control_gain = parse_number(key, value);
    } else if (key == "control_tau") {
      cfg.control_tau = parse_number(key, value);
    } else {
      const double num = parse_number(key, value);
      if (key == "phi") cfg.phi = num;
      else if (key == "X0") cfg.table_amplitude = num;
      else if (key == "omega") cfg.table_omega = num;
      else if (key == "r") cfg.restitution = num;
      else if (key == "x0") cfg.x0 = num;
      else if (key == "v0") cfg.v0 = num;
      else if (key == "t0") cfg.t0 = num;
      else if (key == "t_end") cfg.t_end = num;
      if (!cfg.model.empty()) cfg.overrides[key] = num;
    }
  }

  if (cfg.restitution && !(*cfg.restitution > 0.0 && *cfg.restitution < 1.0))
    throw SchemaError("r", "restitution must satisfy 0 < r < 1");
  try {
    cfg.step.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError("rel_tol", e.what());
  }
  try {
    cfg.zeno.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError("zeno_dt", e.what());
  }
  return cfg;
}

ModelInstance resolve(const RunConfig& cfg) {
  ModelInstance inst;
  if (!cfg.model.empty() && !cfg.field_text.empty())
    throw SchemaError("model", "exactly one of {model, field} may be present");
  if (cfg.model.empty() && cfg.field_text.empty())
    throw SchemaError("model", "exactly one of {model, field} must be present");
  if (!cfg.model.empty()) {
    try {
      inst = instantiate(cfg.model, cfg.overrides);
    } catch (const UnknownModel& e) {
      throw SchemaError("model", e.what());
    } catch (const UnknownParameter& e) {
      throw SchemaError("model", e.what());
    } catch (const std::invalid_argument& e) {
      throw SchemaError("model", e.what());
    }
  } else {
    Expression expr = [&] {
      try {
        return parse_expression(cfg.field_text);
      } catch (const std::exception& e) {
        throw SchemaError("field", e.what());
      }
    }();
    if (!cfg.restitution) throw SchemaError("r", "inline fields require a restitution value");
    Guard guard = Guard::fixed(cfg.phi);
    if (cfg.guard_kind == "sinusoidal") {
      if (!cfg.table_amplitude || !cfg.table_omega)
        throw SchemaError("X0", "sinusoidal guards require X0 and omega");
      guard = Guard::sinusoidal(*cfg.table_amplitude, *cfg.table_omega);
    }
    try {
      inst.system = HybridSystem{expr.as_field(), guard, ImpactLaw(*cfg.restitution),
                                 std::nullopt, std::nullopt};
    } catch (const std::invalid_argument& e) {
      throw SchemaError("r", e.what());
    }
    inst.name = "inline";
    inst.field_expression = expr.str();
    if (!cfg.x0) throw SchemaError("x0", "inline fields require an initial position");
    inst.init = State(cfg.t0.value_or(0.0), {*cfg.x0, cfg.v0.value_or(0.0)});
    inst.t_end = cfg.t_end.value_or(inst.init.t + 10.0);
  }

  if (cfg.control_gain || cfg.control_tau) {
    if (!(cfg.control_gain && cfg.control_tau))
      throw SchemaError("control_C", "delay control requires both control_C and control_tau");
    if (!(*cfg.control_tau > 0.0)) throw SchemaError("control_tau", "must be positive");
    inst.control = ControlParams{*cfg.control_gain, *cfg.control_tau};
  }
  return inst;
}

}  // namespace chatter
