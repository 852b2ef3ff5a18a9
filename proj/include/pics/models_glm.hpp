#pragma once

// Main-effects logistic model for a 2^2 factorial experiment.

#include <array>
#include <cstddef>
#include <string>

#include "pics/models_nlr.hpp"
#include "pics/numcore.hpp"

namespace pics {

struct GlmParams {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;

  [[nodiscard]] ParamVector to_vector() const { return {beta0, beta1, beta2}; }
  static GlmParams from_vector(const ParamVector& v) { return {v[0], v[1], v[2]}; }
  GlmParams operator-() const { return {-beta0, -beta1, -beta2}; }
};

/// Coded level combination. Row index r = 1 <-> x1 = +1 and s = 1 <-> x2 = +1.
struct LevelPoint {
  int x1 = 1;
  int x2 = 1;

  /// Position in the fixed order (+1,+1), (+1,-1), (-1,+1), (-1,-1).
  [[nodiscard]] std::size_t index() const {
    return static_cast<std::size_t>((x1 > 0 ? 0 : 2) + (x2 > 0 ? 0 : 1));
  }
  [[nodiscard]] ParamVector regressors() const {
    return {1.0, static_cast<double>(x1), static_cast<double>(x2)};
  }
  [[nodiscard]] std::string label() const;

  friend bool operator==(const LevelPoint&, const LevelPoint&) = default;
  friend auto operator<=>(const LevelPoint& a, const LevelPoint& b) {
    return a.index() <=> b.index();
  }
};

inline constexpr std::array<LevelPoint, 4> kLevelPoints{
    LevelPoint{1, 1}, LevelPoint{1, -1}, LevelPoint{-1, 1}, LevelPoint{-1, -1}};

/// Upper bound on |beta0| under the equal-coefficient constraint
/// beta0 = beta1 = beta2.
inline constexpr double kEqualCoefficientBound = 0.8314;

double linear_predictor(const GlmParams& beta, const LevelPoint& p);

/// Overflow-safe logistic of the linear predictor.
double success_prob(const GlmParams& beta, const LevelPoint& p);

/// pi (1 - pi)
double bernoulli_weight(const GlmParams& beta, const LevelPoint& p);

/// w x x^T with x = (1, x1, x2).
SymMatrix fisher_info_glm(const GlmParams& beta, const LevelPoint& p);

int simulate_binary(const GlmParams& beta, const LevelPoint& p, Rng& rng);

}  // namespace pics
