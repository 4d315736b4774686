// Run-configuration parsing: one flat key/value table naming either a
// catalog model or an inline field expression, plus tolerances, Zeno
// options, optional delay control, and output destinations.
#pragma once

#include <map>
#include <optional>
#include <string>

#include "chatter/engine.hpp"
#include "chatter/models.hpp"

namespace chatter {

struct SchemaError : std::runtime_error {
  SchemaError(const std::string& key_path, const std::string& what)
      : std::runtime_error("config key '" + key_path + "': " + what), key(key_path) {}
  std::string key;
};

enum class CapMode { none, automatic, fixed_count };

struct RunConfig {
  std::string model;                           // catalog model name, or empty
  std::string field_text;                      // inline field expression, or empty
  std::map<std::string, double> overrides;     // model parameter overrides

  // Inline-field system description (ignored when `model` is set).
  std::string guard_kind = "fixed";
  double phi = 0.0;
  std::optional<double> table_amplitude;       // X0
  std::optional<double> table_omega;           // omega
  std::optional<double> restitution;           // r
  std::optional<double> x0, v0, t0, t_end;

  StepControl step;
  ZenoOptions zeno;
  CapMode cap_mode = CapMode::none;
  long cap_count = 0;
  std::optional<double> control_gain;          // control_C
  std::optional<double> control_tau;

  std::string out_trace;
  std::string out_report;
  std::string format = "csv";
};

/// Parses a flat table of `key = value` (or `key: value`) lines. Comments
/// start with '#'. Exactly one of {model, field} must be present; unknown
/// keys are errors, except that a named model additionally accepts its own
/// declared parameters.
RunConfig parse_config(const std::string& text);

/// Materializes the configured system: catalog instantiation with the
/// overrides, or an inline expression-defined field. Validates invariants
/// (restitution range and friends) and applies explicit t_end / initial
/// state settings on top.
ModelInstance resolve(const RunConfig& config);

}  // namespace chatter
