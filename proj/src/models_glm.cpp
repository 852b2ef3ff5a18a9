#include "pics/models_glm.hpp"

#include <cmath>

namespace pics {

namespace {

double logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

}  // namespace

std::string LevelPoint::label() const {
  return std::string(x1 > 0 ? "+1" : "-1") + "," + (x2 > 0 ? "+1" : "-1");
}

double linear_predictor(const GlmParams& beta, const LevelPoint& p) {
  return beta.beta0 + beta.beta1 * p.x1 + beta.beta2 * p.x2;
}

double success_prob(const GlmParams& beta, const LevelPoint& p) {
  return logistic(linear_predictor(beta, p));
}

double bernoulli_weight(const GlmParams& beta, const LevelPoint& p) {
  // e^-|eta| / (1 + e^-|eta|)^2 is exact on both sides and never overflows.
  const double e = std::exp(-std::abs(linear_predictor(beta, p)));
  return e / ((1.0 + e) * (1.0 + e));
}

SymMatrix fisher_info_glm(const GlmParams& beta, const LevelPoint& p) {
  return SymMatrix::outer(p.regressors(), bernoulli_weight(beta, p));
}

int simulate_binary(const GlmParams& beta, const LevelPoint& p, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < success_prob(beta, p) ? 1 : 0;
}

}  // namespace pics
