#pragma once

// Locally D-optimal design measures in closed form, sampling from them, and
// a brute-force grid search used to check the closed forms.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pics/errors.hpp"
#include "pics/models_glm.hpp"
#include "pics/models_nlr.hpp"
#include "pics/numcore.hpp"

namespace pics {

/// Finite-support probability measure over design points P.
template <class P>
class DesignMeasure {
 public:
  static constexpr double kWeightTolerance = 1e-12;

  DesignMeasure(std::vector<P> support, std::vector<double> weights)
      : support_(std::move(support)), weights_(std::move(weights)) {
    if (support_.empty() || support_.size() != weights_.size()) {
      throw DegenerateDesign("design support and weights must be non-empty and equally sized");
    }
    double total = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0)) throw DegenerateDesign("design weights must be non-negative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw DegenerateDesign("design weights must sum to 1");
    for (std::size_t i = 0; i < support_.size(); ++i)
      for (std::size_t j = i + 1; j < support_.size(); ++j)
        if (support_[i] == support_[j]) throw DegenerateDesign("design support points coincide");
  }

  [[nodiscard]] const std::vector<P>& support() const { return support_; }
  [[nodiscard]] const std::vector<double>& weights() const { return weights_; }
  [[nodiscard]] std::size_t size() const { return support_.size(); }

 private:
  std::vector<P> support_;
  std::vector<double> weights_;
};

using NlrDesign = DesignMeasure<double>;
using GlmDesign = DesignMeasure<LevelPoint>;

/// Information matrix of a design: sum_k w_k I(x_k).
template <class P, class Fisher>
SymMatrix design_information(const DesignMeasure<P>& m, Fisher&& fisher) {
  SymMatrix total;
  for (std::size_t k = 0; k < m.size(); ++k) {
    SymMatrix term = fisher(m.support()[k]) * m.weights()[k];
    if (k == 0) {
      total = term;
    } else {
      total += term;
    }
  }
  return total;
}

// Closed forms; support points listed in increasing x.
NlrDesign optimal_design_m1(const ParamVector& theta, const ExperimentInterval& omega);
NlrDesign optimal_design_m2(const ParamVector& theta, double x0_known,
                            const ExperimentInterval& omega);
NlrDesign optimal_design_m3(const ParamVector& theta, const ExperimentInterval& omega);
NlrDesign optimal_design_nlr(const NlrKind& kind, const ParamVector& theta,
                             const ExperimentInterval& omega);

/// Interior point tau of the M2 design (before clamping to x_min).
double m2_tau(double alpha2, double x0, double x_max);

/// Equal-coefficient case beta0 = beta1 = beta2, |beta0| < 0.8314.
GlmDesign mandal_c1(const GlmParams& beta);
/// beta2 = 0, beta0 * beta1 > 0.
GlmDesign mandal_c2(const GlmParams& beta);

/// Inverse-CDF draw of a support point.
template <class P>
P draw_point(const DesignMeasure<P>& m, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double target = u(rng);
  double cumulative = 0.0;
  for (std::size_t k = 0; k + 1 < m.size(); ++k) {
    cumulative += m.weights()[k];
    if (target < cumulative) return m.support()[k];
  }
  return m.support().back();
}

/// Smallest k <= 12 such that every weight is (within 1e-6) a multiple of 1/k,
/// returned with the per-point copy counts. Throws WeightNotRational.
std::pair<std::size_t, std::vector<std::size_t>> rational_copies(std::span<const double> weights);

/// Serves design points in shuffled cycles. Each cycle contains support point
/// k exactly copies[k] times; a replacement measure is only adopted at cycle
/// boundaries.
template <class P>
class BalancedScheduler {
 public:
  BalancedScheduler() = default;

  [[nodiscard]] bool at_cycle_boundary() const { return position_ >= cycle_.size(); }
  [[nodiscard]] std::size_t cycle_length() const { return cycle_.size(); }
  [[nodiscard]] const std::vector<P>& cycle() const { return cycle_; }

  /// Starts a new cycle from m. Only valid at a cycle boundary.
  void begin_cycle(const DesignMeasure<P>& m, Rng& rng) {
    if (!at_cycle_boundary()) throw Error("balanced schedule replaced mid-cycle");
    const auto [k, copies] = rational_copies(m.weights());
    cycle_.clear();
    cycle_.reserve(k);
    for (std::size_t i = 0; i < m.size(); ++i) cycle_.insert(cycle_.end(), copies[i], m.support()[i]);
    std::shuffle(cycle_.begin(), cycle_.end(), rng);
    position_ = 0;
  }

  /// Next point; when the cycle is exhausted, a fresh one is built from
  /// supply() (called only then).
  template <class Supply>
  P next(Supply&& supply, Rng& rng) {
    if (at_cycle_boundary()) begin_cycle(supply(), rng);
    return cycle_[position_++];
  }

 private:
  std::vector<P> cycle_;
  std::size_t position_ = 0;
};

// ---------------------------------------------------------------------------
// Grid oracle. Test-grade brute force over small design classes.

struct NlrOracleConfig {
  std::size_t support_size = 2;      // 2 or 3, balanced weights
  double coarse_step = 0.05;
  double refine_step = 0.01;
  bool fix_last_at_max = false;      // restrict the last point to x_max
};

struct NlrOracleResult {
  std::vector<double> support;
  double criterion = 0.0;  // det of the balanced-design information
};

/// Maximizes det(1/m sum_k I(x_k)) over m-point balanced designs on a grid,
/// then re-scans a neighbourhood of the best cell at the refine step.
NlrOracleResult grid_oracle_nlr(const std::function<SymMatrix(double)>& fisher,
                                const ExperimentInterval& omega, const NlrOracleConfig& config);

struct GlmOracleResult {
  std::array<double, 4> proportions{};
  double criterion = 0.0;
};

/// Exhaustive scan of the 3-simplex of allocations at the given step.
GlmOracleResult grid_oracle_glm(const GlmParams& beta, double step = 0.001);

/// D-criterion of a design: det of its information matrix.
double d_criterion_nlr(const NlrDesign& m, const std::function<SymMatrix(double)>& fisher);
double d_criterion_glm(const GlmDesign& m, const GlmParams& beta);

/// {"support": [...], "weights": [...]}; GLM support points are [x1, x2] pairs.
std::string design_to_json(const NlrDesign& m);
std::string design_to_json(const GlmDesign& m);

}  // namespace pics
