#include "pics/config.hpp"

#include <cmath>

#include "pics/errors.hpp"
#include "pics/optdesign.hpp"

namespace pics {

std::string_view to_string(ModelKind m) {
  switch (m) {
    case ModelKind::M1:
      return "M1";
    case ModelKind::M2:
      return "M2";
    case ModelKind::M3:
      return "M3";
    case ModelKind::GlmC1:
      return "GLM_C1";
    case ModelKind::GlmC2:
      return "GLM_C2";
  }
  return "?";
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::CM:
      return "CM";
    case Method::PICS:
      return "PICS";
    case Method::BalancedPICS:
      return "BalancedPICS";
  }
  return "?";
}

std::string_view to_string(InitialDesign d) {
  switch (d) {
    case InitialDesign::UniformNLR:
      return "uniform";
    case InitialDesign::ThreePointNLR:
      return "three-point";
    case InitialDesign::FourPointGLM:
      return "four-point";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view s) {
  for (auto m : {ModelKind::M1, ModelKind::M2, ModelKind::M3, ModelKind::GlmC1, ModelKind::GlmC2})
    if (s == to_string(m)) return m;
  throw ConfigError("model: unknown value '" + std::string(s) + "' (M1, M2, M3, GLM_C1, GLM_C2)");
}

Method parse_method(std::string_view s) {
  for (auto m : {Method::CM, Method::PICS, Method::BalancedPICS})
    if (s == to_string(m)) return m;
  throw ConfigError("method: unknown value '" + std::string(s) + "' (CM, PICS, BalancedPICS)");
}

InitialDesign parse_initial_design(std::string_view s) {
  for (auto d : {InitialDesign::UniformNLR, InitialDesign::ThreePointNLR, InitialDesign::FourPointGLM})
    if (s == to_string(d)) return d;
  throw ConfigError("initial_design: unknown value '" + std::string(s) +
                    "' (uniform, three-point, four-point)");
}

ParamVector default_true_params(ModelKind kind) {
  switch (kind) {
    case ModelKind::M1:
    case ModelKind::M2:
      return {32.11, 105.65};
    case ModelKind::M3:
      return {32.11, 105.65, 86.67};
    case ModelKind::GlmC1:
      return {0.7125, 0.7125, 0.7125};
    case ModelKind::GlmC2:
      return {1.5, 0.5, 0.0};
  }
  return {};
}

ModelSpec ModelSpec::defaults(ModelKind kind) {
  ModelSpec spec;
  spec.kind = kind;
  spec.truth = default_true_params(kind);
  return spec;
}

NlrKind ModelSpec::nlr_kind() const {
  switch (kind) {
    case ModelKind::M1:
      return {NlrModel::M1, 0.0};
    case ModelKind::M2:
      return {NlrModel::M2, x0_known};
    case ModelKind::M3:
      return {NlrModel::M3, 0.0};
    default:
      throw ConfigError("model: " + std::string(to_string(kind)) + " is not a growth model");
  }
}

ModelSpec RunConfig::model_spec() const {
  ModelSpec spec;
  spec.kind = model;
  spec.truth = true_params.value_or(default_true_params(model));
  spec.sigma2 = sigma2;
  spec.omega = omega;
  spec.x0_known = x0_known;
  return spec;
}

void validate(const RunConfig& c) {
  const ModelSpec spec = c.model_spec();
  if (spec.truth.size() != spec.dim()) {
    throw ConfigError("true_params: model " + std::string(to_string(c.model)) + " needs " +
                      std::to_string(spec.dim()) + " values");
  }
  for (double v : spec.truth)
    if (!std::isfinite(v)) throw ConfigError("true_params: entries must be finite");
  if (c.n1 >= c.n) throw ConfigError("n1: must be smaller than n");
  if (c.n1 < spec.dim() + 2) throw ConfigError("n1: must be at least d + 2");
  if (c.replications < 1) throw ConfigError("replications: must be at least 1");
  if (c.cm_grid < 2) throw ConfigError("cm_grid: must be at least 2");
  if (c.delta_stop && !(*c.delta_stop >= 0.0)) throw ConfigError("delta_stop: must be non-negative");
  if (spec.is_glm()) {
    if (c.initial_design != InitialDesign::FourPointGLM) {
      throw ConfigError("initial_design: GLM models require four-point");
    }
    if (c.n1 % 4 != 0) throw ConfigError("n1: four-point initial design needs n1 divisible by 4");
    if (c.method == Method::BalancedPICS) {
      throw ConfigError("method: BalancedPICS needs rational design weights; GLM designs are irrational");
    }
  } else {
    if (c.initial_design == InitialDesign::FourPointGLM) {
      throw ConfigError("initial_design: four-point is only valid for GLM models");
    }
    if (!(c.sigma2 > 0.0)) throw ConfigError("sigma2: must be positive");
    if (!(c.omega.x_min > 0.0 && c.omega.x_min < c.omega.x_max)) {
      throw ConfigError("omega: need 0 < x_min < x_max");
    }
    if (spec.truth[0] <= 0.0 || spec.truth[1] <= 0.0) {
      throw ConfigError("true_params: alpha1 and alpha2 must be positive");
    }
    if (c.model == ModelKind::M2 && !(c.x0_known > c.omega.x_min && c.x0_known < c.omega.x_max)) {
      throw ConfigError("x0_known: must lie inside omega");
    }
    if (c.model == ModelKind::M3 && !(spec.truth[2] > c.omega.x_min && spec.truth[2] < c.omega.x_max)) {
      throw ConfigError("true_params: change point must lie inside omega");
    }
  }
  if (c.model == ModelKind::GlmC1) {
    const auto& b = spec.truth;
    if (std::abs(b[0] - b[1]) > 1e-9 || std::abs(b[0] - b[2]) > 1e-9 || !(std::abs(b[0]) < kEqualCoefficientBound)) {
      throw ConfigError("true_params: GLM_C1 needs beta0 = beta1 = beta2 with |beta0| < 0.8314");
    }
  }
  if (c.model == ModelKind::GlmC2) {
    const auto& b = spec.truth;
    if (std::abs(b[2]) > 1e-9 || !(b[0] * b[1] > 0.0)) {
      throw ConfigError("true_params: GLM_C2 needs beta2 = 0 and beta0 * beta1 > 0");
    }
  }
}

}  // namespace pics
