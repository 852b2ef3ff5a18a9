#include "pics/engine.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <random>

namespace pics {

NlrProblem::NlrProblem(ModelSpec spec, NlsOptions fit_options)
    : spec_(std::move(spec)), kind_(spec_.nlr_kind()), fit_options_(fit_options) {}

SymMatrix NlrProblem::fisher(const ParamVector& theta, double x) const {
  return fisher_info_nlr(kind_, theta, x, spec_.noise());
}

double NlrProblem::observe(double x, Rng& rng) const {
  return simulate_response_nlr(kind_, spec_.truth, spec_.noise(), x, rng);
}

std::vector<double> NlrProblem::static_design(InitialDesign design, std::size_t n1, Rng& rng) const {
  const ExperimentInterval& omega = spec_.omega;
  std::vector<double> points;
  points.reserve(n1);
  switch (design) {
    case InitialDesign::UniformNLR: {
      std::uniform_real_distribution<double> u(omega.x_min, omega.x_max);
      for (std::size_t i = 0; i < n1; ++i) points.push_back(u(rng));
      break;
    }
    case InitialDesign::ThreePointNLR: {
      const NlrDesign xi0({omega.x_min, omega.x_max, omega.midpoint()}, {0.3, 0.3, 0.4});
      for (std::size_t i = 0; i < n1; ++i) points.push_back(draw_point(xi0, rng));
      break;
    }
    case InitialDesign::FourPointGLM:
      throw ConfigError("initial_design: four-point is only valid for GLM models");
  }
  return points;
}

FitResult NlrProblem::refit(const std::optional<ParamVector>& warm) const {
  return nls_fit(kind_, spec_.omega, data_, warm, fit_options_);
}

NlrDesign NlrProblem::plug_in_design(const ParamVector& theta) const {
  return optimal_design_nlr(kind_, theta, spec_.omega);
}

double NlrProblem::cm_select(const SymMatrix& cum, const ParamVector& theta, std::size_t grid) const {
  const ExperimentInterval& omega = spec_.omega;
  const double noise_scale = 1.0 / spec_.sigma2;
  auto criterion = [&](double x) {
    SymMatrix m = cum;
    m.add_outer(growth_grad(kind_, theta, x), noise_scale);
    return det(m);
  };
  const double h = (omega.x_max - omega.x_min) / static_cast<double>(grid - 1);
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < grid; ++g) {
    const double value = criterion(omega.x_min + h * static_cast<double>(g));
    if (value > best_value) {
      best_value = value;
      best = g;
    }
  }
  double best_x = omega.x_min + h * static_cast<double>(best);
  const double lo = std::max(omega.x_min, best_x - h);
  const double hi = std::min(omega.x_max, best_x + h);
  const auto [x, neg] =
      boost::math::tools::brent_find_minima([&](double t) { return -criterion(t); }, lo, hi, 30);
  if (-neg > best_value) best_x = x;
  return best_x;
}

GlmProblem::GlmProblem(ModelSpec spec) : spec_(std::move(spec)) {}

SymMatrix GlmProblem::fisher(const ParamVector& theta, const LevelPoint& p) const {
  return fisher_info_glm(GlmParams::from_vector(theta), p);
}

int GlmProblem::observe(const LevelPoint& p, Rng& rng) const {
  return simulate_binary(GlmParams::from_vector(spec_.truth), p, rng);
}

std::vector<LevelPoint> GlmProblem::static_design(InitialDesign design, std::size_t n1, Rng& rng) const {
  if (design != InitialDesign::FourPointGLM) {
    throw ConfigError("initial_design: GLM models require four-point");
  }
  if (n1 % 4 != 0) throw ConfigError("n1: four-point initial design needs n1 divisible by 4");
  std::vector<LevelPoint> points;
  points.reserve(n1);
  for (const auto& p : kLevelPoints) points.insert(points.end(), n1 / 4, p);
  std::shuffle(points.begin(), points.end(), rng);
  return points;
}

FitResult GlmProblem::refit(const std::optional<ParamVector>& warm) const {
  if (spec_.kind == ModelKind::GlmC1) return logistic_mle_c1(counts_);
  return logistic_mle_c2(counts_, warm);
}

GlmDesign GlmProblem::plug_in_design(const ParamVector& theta) const {
  const GlmParams beta = GlmParams::from_vector(theta);
  return spec_.kind == ModelKind::GlmC1 ? mandal_c1(beta) : mandal_c2(beta);
}

ParamVector GlmProblem::project(const ParamVector& theta) const {
  constexpr double kFloor = 1e-6;
  if (spec_.kind == ModelKind::GlmC1) {
    const double b = std::clamp(theta[0], -(kEqualCoefficientBound - kFloor), kEqualCoefficientBound - kFloor);
    return {b, b, b};
  }
  const double sign = theta[0] + theta[1] >= 0.0 ? 1.0 : -1.0;
  return {sign * std::max(std::abs(theta[0]), kFloor), sign * std::max(std::abs(theta[1]), kFloor), 0.0};
}

LevelPoint GlmProblem::cm_select(const SymMatrix& cum, const ParamVector& theta, std::size_t) const {
  LevelPoint best = kLevelPoints[0];
  double best_value = -std::numeric_limits<double>::infinity();
  for (const auto& p : kLevelPoints) {
    const double value = det(cum + fisher(theta, p));
    if (value > best_value) {
      best_value = value;
      best = p;
    }
  }
  return best;
}

Trajectory<double> run_nlr(const RunConfig& config, std::uint64_t seed) {
  SequentialEngine<NlrProblem> engine(NlrProblem(config.model_spec()), config.method, seed,
                                      {config.cm_grid});
  return engine.run(config.initial_design, config.n1, config.n, config.delta_stop);
}

Trajectory<LevelPoint> run_glm(const RunConfig& config, std::uint64_t seed) {
  SequentialEngine<GlmProblem> engine(GlmProblem(config.model_spec()), config.method, seed,
                                      {config.cm_grid});
  return engine.run(config.initial_design, config.n1, config.n, config.delta_stop);
}

}  // namespace pics
