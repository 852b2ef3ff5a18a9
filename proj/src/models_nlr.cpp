#include "pics/models_nlr.hpp"

#include <cmath>
#include <string>

#include "pics/errors.hpp"

namespace pics {

namespace {

void check_x(double x) {
  if (!(x > 0.0)) throw DomainError("design point must be positive, got " + std::to_string(x));
}

}  // namespace

LinearCoeffs reduced_linear_coeffs(double alpha1, double alpha2, double x0) {
  const double at_x0 = alpha1 * std::exp(-alpha2 / x0);
  const double b = at_x0 * alpha2 / (x0 * x0);
  return {at_x0 - b * x0, b};
}

double growth_mean(const NlrKind& kind, const ParamVector& theta, double x) {
  check_x(x);
  const double a1 = theta[0];
  const double a2 = theta[1];
  if (kind.tag == NlrModel::M1) return a1 * std::exp(-a2 / x);
  const double x0 = kind.change_point(theta);
  if (x < x0) return a1 * std::exp(-a2 / x);
  const auto [a, b] = reduced_linear_coeffs(a1, a2, x0);
  return a + b * x;
}

ParamVector growth_grad(const NlrKind& kind, const ParamVector& theta, double x) {
  check_x(x);
  const double a1 = theta[0];
  const double a2 = theta[1];
  ParamVector g(kind.dim());
  if (kind.tag == NlrModel::M1 || x < kind.change_point(theta)) {
    const double e = std::exp(-a2 / x);
    g[0] = e;
    g[1] = -a1 * e / x;
    return g;  // d/dx0 stays 0 on the exponential branch
  }
  // Linear branch: a1 * E * L with E = exp(-a2/x0), L = 1 + a2 (x - x0) / x0^2.
  const double x0 = kind.change_point(theta);
  const double e = std::exp(-a2 / x0);
  const double dx = x - x0;
  const double lin = 1.0 + a2 * dx / (x0 * x0);
  g[0] = e * lin;
  g[1] = a1 * e * (dx / (x0 * x0) - lin / x0);
  if (kind.tag == NlrModel::M3) {
    g[2] = a1 * e * a2 / (x0 * x0) * (lin - (2.0 * x - x0) / x0);
  }
  return g;
}

SymMatrix fisher_info_nlr(const NlrKind& kind, const ParamVector& theta, double x,
                          const NoiseSpec& noise) {
  return SymMatrix::outer(growth_grad(kind, theta, x), 1.0 / noise.sigma2);
}

double simulate_response_nlr(const NlrKind& kind, const ParamVector& theta,
                             const NoiseSpec& noise, double x, Rng& rng) {
  const double mean = growth_mean(kind, theta, x);
  if (noise.sigma2 <= 0.0) return mean;
  std::normal_distribution<double> eps(0.0, std::sqrt(noise.sigma2));
  return mean + eps(rng);
}

std::string_view to_string(NlrModel m) {
  switch (m) {
    case NlrModel::M1:
      return "M1";
    case NlrModel::M2:
      return "M2";
    case NlrModel::M3:
      return "M3";
  }
  return "?";
}

}  // namespace pics
