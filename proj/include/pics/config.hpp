#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "pics/estimate.hpp"
#include "pics/models_glm.hpp"
#include "pics/models_nlr.hpp"
#include "pics/numcore.hpp"

namespace pics {

enum class ModelKind { M1, M2, M3, GlmC1, GlmC2 };
enum class Method { CM, PICS, BalancedPICS };
enum class InitialDesign { UniformNLR, ThreePointNLR, FourPointGLM };

std::string_view to_string(ModelKind m);
std::string_view to_string(Method m);
std::string_view to_string(InitialDesign d);
ModelKind parse_model_kind(std::string_view s);
Method parse_method(std::string_view s);
InitialDesign parse_initial_design(std::string_view s);

/// A fully specified data-generating model.
struct ModelSpec {
  ModelKind kind = ModelKind::M1;
  ParamVector truth;
  double sigma2 = 0.086;
  ExperimentInterval omega;
  double x0_known = 86.67;  // M2 only

  /// Model with the default true parameters.
  static ModelSpec defaults(ModelKind kind);

  [[nodiscard]] bool is_glm() const { return kind == ModelKind::GlmC1 || kind == ModelKind::GlmC2; }
  [[nodiscard]] std::size_t dim() const { return kind == ModelKind::M1 || kind == ModelKind::M2 ? 2 : 3; }
  /// Throws ConfigError for GLM kinds.
  [[nodiscard]] NlrKind nlr_kind() const;
  [[nodiscard]] NoiseSpec noise() const { return {sigma2}; }
};

ParamVector default_true_params(ModelKind kind);

struct RunConfig {
  ModelKind model = ModelKind::M1;
  Method method = Method::PICS;
  std::size_t n1 = 40;
  std::size_t n = 100;
  InitialDesign initial_design = InitialDesign::UniformNLR;
  std::optional<ParamVector> true_params;  // defaults per model when absent
  double sigma2 = 0.086;
  double x0_known = 86.67;
  ExperimentInterval omega;
  std::uint64_t seed = 1;
  std::size_t replications = 1;
  std::optional<double> delta_stop;
  std::size_t cm_grid = 400;
  std::size_t threads = 0;  // 0: available parallelism
  bool record_timing = false;

  [[nodiscard]] ModelSpec model_spec() const;
};

/// Throws ConfigError naming the offending field.
void validate(const RunConfig& config);

}  // namespace pics
