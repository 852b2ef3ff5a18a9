#pragma once

// Maximum-likelihood subsolvers: least squares for the growth models and
// constrained logistic likelihood for the factorial model.

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>

#include "pics/models_glm.hpp"
#include "pics/models_nlr.hpp"
#include "pics/numcore.hpp"

namespace pics {

struct FitResult {
  ParamVector theta_hat;
  double objective = 0.0;  // residual sum of squares or negative log-likelihood
  bool converged = false;
  bool boundary = false;   // optimum pinned to a box edge
  int iterations = 0;
};

struct Box {
  ParamVector lower;
  ParamVector upper;

  [[nodiscard]] ParamVector project(ParamVector x) const;
};

struct MinimizeOptions {
  int starts = 3;               // the init plus (starts - 1) perturbed copies
  double perturbation = 0.05;   // relative offset of the perturbed starts
  double initial_simplex = 0.05;
  double diameter_tol = 1e-8;   // relative to 1 + |x_best|
  int max_iter_per_dim = 500;
};

using Objective = std::function<double(const ParamVector&)>;

/// Nelder-Mead with every trial vertex projected onto the box. The init is
/// projected before its first evaluation.
FitResult local_minimize(const Objective& f, const ParamVector& init, const Box& bounds,
                         const MinimizeOptions& opts = {});

struct NlrObservation {
  double x = 0.0;
  double y = 0.0;
};

struct NlsOptions {
  MinimizeOptions minimize;
  std::size_t change_point_grid = 40;  // M3 profile search over x0
  std::size_t alpha2_grid = 24;        // log-spaced a2 scan of the profile search
};

/// Parameter box used by nls_fit: a1, a2 in [1e-3, 1e3], x0 in [x_min + 1, x_max - 1].
Box nls_bounds(const NlrKind& kind, const ExperimentInterval& omega);

double residual_sum_of_squares(const NlrKind& kind, const ParamVector& theta,
                               std::span<const NlrObservation> data);

/// Least-squares fit. M1/M2: with an init, a warm-started local search;
/// without one, a profile search (a1 solved in closed form along an a2 scan)
/// polished by the simplex. M3: always a profile search over a grid of change
/// points; the simplex then starts from whichever of the warm init and the
/// best profile point fits the data better.
/// Throws InsufficientData when |data| <= d or all x coincide.
FitResult nls_fit(const NlrKind& kind, const ExperimentInterval& omega,
                  std::span<const NlrObservation> data, const std::optional<ParamVector>& init,
                  const NlsOptions& opts = {});

struct GlmObservation {
  LevelPoint point;
  int y = 0;
};

/// Sufficient statistics of factorial binary data.
struct LevelCounts {
  std::array<int, 4> trials{};
  std::array<int, 4> successes{};

  void add(const LevelPoint& p, int y);
  [[nodiscard]] int total() const;
  static LevelCounts from(std::span<const GlmObservation> data);
};

double glm_log_likelihood(const GlmParams& beta, const LevelCounts& counts);

/// beta0 = beta1 = beta2 = b with |b| < 0.8314; 1-D Brent search on the
/// concave likelihood. Returned theta is (b, b, b).
FitResult logistic_mle_c1(const LevelCounts& counts);
FitResult logistic_mle_c1(std::span<const GlmObservation> data);

/// beta2 = 0, beta0 = s e^u0, beta1 = s e^u1 with u in [-10, 10]^2; both
/// signs s are fitted and the better one kept.
FitResult logistic_mle_c2(const LevelCounts& counts,
                          const std::optional<ParamVector>& init = std::nullopt);
FitResult logistic_mle_c2(std::span<const GlmObservation> data);

}  // namespace pics
