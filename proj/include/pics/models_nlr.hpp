#pragma once

// Growth models for nanostructure length over time.
//
//   M1: g(x) = a1 * exp(-a2 / x)
//   M2: exponential for x < x0, linear a + b x for x >= x0, x0 known
//   M3: as M2 with x0 a third unknown parameter
//
// The linear branch coefficients are fixed by requiring g and g' to be
// continuous at x0, leaving theta = (a1, a2) for M2 and (a1, a2, x0) for M3.
//
// The per-point Fisher information is sigma^-2 * grad g * grad g^T. sigma^2
// only scales information matrices, so it cancels in every determinant
// comparison and in the relative efficiency; the least-squares estimate of
// theta does not depend on it at all.

#include <random>
#include <string_view>

#include "pics/numcore.hpp"

namespace pics {

using Rng = std::mt19937_64;

enum class NlrModel { M1, M2, M3 };

struct NlrKind {
  NlrModel tag = NlrModel::M1;
  double x0_known = 0.0;  // M2 only

  [[nodiscard]] std::size_t dim() const { return tag == NlrModel::M3 ? 3 : 2; }
  /// Change point in effect for parameters theta (M2: known, M3: theta[2]).
  [[nodiscard]] double change_point(const ParamVector& theta) const {
    return tag == NlrModel::M3 ? theta[2] : x0_known;
  }
};

struct ExperimentInterval {
  double x_min = 0.5;
  double x_max = 210.0;

  [[nodiscard]] bool contains(double x) const { return x >= x_min && x <= x_max; }
  [[nodiscard]] double midpoint() const { return 0.5 * (x_min + x_max); }
};

struct NoiseSpec {
  double sigma2 = 0.086;
};

struct LinearCoeffs {
  double a = 0.0;
  double b = 0.0;
};

/// Intercept and slope of the linear branch that continue a1*exp(-a2/x)
/// smoothly (value and slope) at x0.
LinearCoeffs reduced_linear_coeffs(double alpha1, double alpha2, double x0);

/// Throws DomainError for x <= 0.
double growth_mean(const NlrKind& kind, const ParamVector& theta, double x);

/// Gradient of growth_mean with respect to theta. At x == x0 the linear
/// (right) branch is used.
ParamVector growth_grad(const NlrKind& kind, const ParamVector& theta, double x);

SymMatrix fisher_info_nlr(const NlrKind& kind, const ParamVector& theta, double x,
                          const NoiseSpec& noise);

double simulate_response_nlr(const NlrKind& kind, const ParamVector& theta,
                             const NoiseSpec& noise, double x, Rng& rng);

std::string_view to_string(NlrModel m);

}  // namespace pics
