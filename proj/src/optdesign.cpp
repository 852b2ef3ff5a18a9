#include "pics/optdesign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include "json.hpp"
#include <string>

namespace pics {

namespace {

NlrDesign balanced(std::vector<double> support) {
  for (std::size_t k = 1; k < support.size(); ++k) {
    if (!(support[k] > support[k - 1])) {
      throw DegenerateDesign("closed-form support points coincide or are out of order");
    }
  }
  const double w = 1.0 / static_cast<double>(support.size());
  std::vector<double> weights(support.size(), w);
  return {std::move(support), std::move(weights)};
}

}  // namespace

NlrDesign optimal_design_m1(const ParamVector& theta, const ExperimentInterval& omega) {
  const double a2 = theta[1];
  const double x1 = std::max(a2 * omega.x_max / (a2 + omega.x_max), omega.x_min);
  return balanced({x1, omega.x_max});
}

double m2_tau(double alpha2, double x0, double x_max) {
  const double num = (x_max - 2.0 * x0) * x0 - alpha2 * (x_max - x0);
  const double den = x0 * (x0 * x0 + alpha2 * (x_max - x0));
  const double denominator = 1.0 - alpha2 * num / den;
  if (!(denominator > 0.0)) throw DegenerateDesign("M2 design: tau denominator is not positive");
  return alpha2 / denominator;
}

NlrDesign optimal_design_m2(const ParamVector& theta, double x0_known,
                            const ExperimentInterval& omega) {
  const double tau = m2_tau(theta[1], x0_known, omega.x_max);
  return balanced({std::max(tau, omega.x_min), omega.x_max});
}

NlrDesign optimal_design_m3(const ParamVector& theta, const ExperimentInterval& omega) {
  const double a2 = theta[1];
  const double x0 = theta[2];
  return balanced({std::max(a2 * x0 / (a2 + x0), omega.x_min), x0, omega.x_max});
}

NlrDesign optimal_design_nlr(const NlrKind& kind, const ParamVector& theta,
                             const ExperimentInterval& omega) {
  switch (kind.tag) {
    case NlrModel::M1:
      return optimal_design_m1(theta, omega);
    case NlrModel::M2:
      return optimal_design_m2(theta, kind.x0_known, omega);
    case NlrModel::M3:
      return optimal_design_m3(theta, omega);
  }
  throw DomainError("unknown model");
}

GlmDesign mandal_c1(const GlmParams& beta) {
  constexpr double kTie = 1e-9;
  if (std::abs(beta.beta0 - beta.beta1) > kTie || std::abs(beta.beta0 - beta.beta2) > kTie) {
    throw ConstraintViolated("equal-coefficient design requires beta0 = beta1 = beta2");
  }
  if (!(std::abs(beta.beta0) < kEqualCoefficientBound)) {
    throw ConstraintViolated("equal-coefficient design requires |beta0| < 0.8314");
  }
  std::array<double, 4> v{};
  for (const auto& p : kLevelPoints) v[p.index()] = 1.0 / bernoulli_weight(beta, p);
  // v12 = v21 = v22 hold by symmetry of the weight in the linear predictor.
  const double vv = v[1];
  const double v11 = v[0];
  if (!(v11 < 3.0 * vv)) throw ConstraintViolated("equal-coefficient design requires v11 < 3 v");
  const double den = 9.0 * vv - v11;
  const double rest = 2.0 * vv / den;
  return {{kLevelPoints.begin(), kLevelPoints.end()}, {(3.0 * vv - v11) / den, rest, rest, rest}};
}

GlmDesign mandal_c2(const GlmParams& beta) {
  if (std::abs(beta.beta2) > 1e-9) throw ConstraintViolated("zero-interaction design requires beta2 = 0");
  if (!(beta.beta0 * beta.beta1 > 0.0)) {
    throw ConstraintViolated("zero-interaction design requires beta0 * beta1 > 0");
  }
  const double u = 1.0 / bernoulli_weight(beta, kLevelPoints[0]);
  const double v = 1.0 / bernoulli_weight(beta, kLevelPoints[2]);
  if (std::abs(u - v) < 1e-10) throw DegenerateDesign("zero-interaction design: u and v coincide");
  if (!(u > v)) throw ConstraintViolated("zero-interaction design requires u > v");
  const double d = std::sqrt(u * u - u * v + v * v);
  const double upper = (2.0 * u - v - d) / (6.0 * (u - v));
  const double lower = (u - 2.0 * v + d) / (6.0 * (u - v));
  return {{kLevelPoints.begin(), kLevelPoints.end()}, {upper, upper, lower, lower}};
}

std::pair<std::size_t, std::vector<std::size_t>> rational_copies(std::span<const double> weights) {
  constexpr std::size_t kMaxDenominator = 12;
  constexpr double kTolerance = 1e-6;
  for (std::size_t k = 1; k <= kMaxDenominator; ++k) {
    std::vector<std::size_t> copies;
    bool ok = true;
    std::size_t total = 0;
    for (double w : weights) {
      const double scaled = w * static_cast<double>(k);
      const double rounded = std::round(scaled);
      if (std::abs(scaled - rounded) > kTolerance * static_cast<double>(k)) {
        ok = false;
        break;
      }
      copies.push_back(static_cast<std::size_t>(rounded));
      total += copies.back();
    }
    if (ok && total == k) return {k, std::move(copies)};
  }
  throw WeightNotRational("design weights are not multiples of 1/k for any k <= 12");
}

NlrOracleResult grid_oracle_nlr(const std::function<SymMatrix(double)>& fisher,
                                const ExperimentInterval& omega, const NlrOracleConfig& config) {
  const std::size_t m = config.support_size;
  if (m < 2 || m > 3) throw DomainError("grid oracle supports 2- or 3-point designs");
  const double w = 1.0 / static_cast<double>(m);

  std::vector<double> grid;
  for (double x = omega.x_min; x <= omega.x_max + 1e-9; x += config.coarse_step) {
    grid.push_back(std::min(x, omega.x_max));
  }
  if (grid.back() < omega.x_max) grid.push_back(omega.x_max);
  std::vector<SymMatrix> info;
  info.reserve(grid.size());
  for (double x : grid) info.push_back(fisher(x) * w);

  auto criterion = [&](std::span<const double> xs) {
    SymMatrix total = fisher(xs[0]) * w;
    for (std::size_t k = 1; k < xs.size(); ++k) total += fisher(xs[k]) * w;
    return det(total);
  };

  NlrOracleResult best;
  best.criterion = -std::numeric_limits<double>::infinity();
  const std::size_t n = grid.size();
  const std::size_t last_lo = config.fix_last_at_max ? n - 1 : 0;
  if (m == 2) {
    for (std::size_t j = std::max<std::size_t>(1, last_lo); j < n; ++j) {
      for (std::size_t i = 0; i < j; ++i) {
        const double c = det(info[i] + info[j]);
        if (c > best.criterion) best = {{grid[i], grid[j]}, c};
      }
    }
  } else {
    for (std::size_t k = std::max<std::size_t>(2, last_lo); k < n; ++k) {
      for (std::size_t j = 1; j < k; ++j) {
        const SymMatrix jk = info[j] + info[k];
        for (std::size_t i = 0; i < j; ++i) {
          const double c = det(info[i] + jk);
          if (c > best.criterion) best = {{grid[i], grid[j], grid[k]}, c};
        }
      }
    }
  }

  // Refinement: coordinate-wise box scan of +/- one coarse step around the best.
  const auto steps = static_cast<int>(std::round(config.coarse_step / config.refine_step));
  std::vector<double> centre = best.support;
  std::vector<double> trial(m);
  auto clamp = [&](double x) { return std::clamp(x, omega.x_min, omega.x_max); };
  if (m == 2) {
    for (int a = -steps; a <= steps; ++a)
      for (int b = -steps; b <= steps; ++b) {
        trial = {clamp(centre[0] + a * config.refine_step), clamp(centre[1] + b * config.refine_step)};
        if (config.fix_last_at_max) trial[1] = omega.x_max;
        if (!(trial[0] < trial[1])) continue;
        const double c = criterion(trial);
        if (c > best.criterion) best = {trial, c};
      }
  } else {
    for (int a = -steps; a <= steps; ++a)
      for (int b = -steps; b <= steps; ++b)
        for (int c3 = -steps; c3 <= steps; ++c3) {
          trial = {clamp(centre[0] + a * config.refine_step), clamp(centre[1] + b * config.refine_step),
                   clamp(centre[2] + c3 * config.refine_step)};
          if (config.fix_last_at_max) trial[2] = omega.x_max;
          if (!(trial[0] < trial[1] && trial[1] < trial[2])) continue;
          const double c = criterion(trial);
          if (c > best.criterion) best = {trial, c};
        }
  }
  return best;
}

GlmOracleResult grid_oracle_glm(const GlmParams& beta, double step) {
  std::array<SymMatrix, 4> info;
  for (const auto& p : kLevelPoints) info[p.index()] = fisher_info_glm(beta, p);
  const auto n = static_cast<int>(std::round(1.0 / step));
  GlmOracleResult best;
  best.criterion = -std::numeric_limits<double>::infinity();
  for (int a = 0; a <= n; ++a) {
    const double pa = a * step;
    const SymMatrix ma = info[0] * pa;
    for (int b = 0; a + b <= n; ++b) {
      const double pb = b * step;
      const SymMatrix mab = ma + info[1] * pb;
      for (int c = 0; a + b + c <= n; ++c) {
        const double pc = c * step;
        const double pd = (n - a - b - c) * step;
        const double crit = det(mab + info[2] * pc + info[3] * pd);
        if (crit > best.criterion) best = {{pa, pb, pc, pd}, crit};
      }
    }
  }
  return best;
}

double d_criterion_nlr(const NlrDesign& m, const std::function<SymMatrix(double)>& fisher) {
  return det(design_information(m, fisher));
}

double d_criterion_glm(const GlmDesign& m, const GlmParams& beta) {
  return det(design_information(m, [&](const LevelPoint& p) { return fisher_info_glm(beta, p); }));
}

std::string design_to_json(const NlrDesign& m) {
  nlohmann::json j;
  j["support"] = m.support();
  j["weights"] = m.weights();
  return j.dump();
}

std::string design_to_json(const GlmDesign& m) {
  nlohmann::json j;
  j["support"] = nlohmann::json::array();
  for (const auto& p : m.support()) j["support"].push_back({p.x1, p.x2});
  j["weights"] = m.weights();
  return j.dump();
}

}  // namespace pics
