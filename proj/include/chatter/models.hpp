// Built-in catalog of the studied impact systems with their published
// parameters, domain boxes and initial data as defaults.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chatter/model.hpp"

namespace chatter {

struct UnknownModel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownParameter : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParamSpec {
  std::string name;
  double value = 0.0;
  std::string unit;
  std::string doc;
};

struct ControlParams {
  double gain = 0.0;
  double tau = 0.0;
};

struct ModelInstance {
  HybridSystem system{VectorField{}, Guard::fixed(0.0), ImpactLaw(0.5), std::nullopt,
                      std::nullopt};
  State init;
  double t_end = 0.0;
  std::optional<ControlParams> control;
  std::string field_expression;  // expression-language equivalent of the base field
  std::string name;
};

struct ModelSpec {
  std::string name;
  std::string summary;
  std::vector<ParamSpec> params;
};

/// The seven built-in models, in catalog order: example1, bouncing_ball,
/// vibrating_table, moon_holmes, moon_holmes_autonomous, coupled_chatter,
/// pyragas_example1.
const std::vector<ModelSpec>& catalog();

/// Builds a model with overrides applied on top of its defaults. Unknown
/// model names and undeclared parameters are rejected.
ModelInstance instantiate(const std::string& name,
                          const std::map<std::string, double>& overrides = {});

}  // namespace chatter
