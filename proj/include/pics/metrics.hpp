#pragma once

// Evaluation of sequential designs against the true optimal design.

#include <array>
#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "pics/config.hpp"
#include "pics/engine.hpp"
#include "pics/numcore.hpp"

namespace pics {

/// Information of the closed-form optimal design at the true parameters:
/// sum_k w_k I(theta*, x_k*). For the factorial model this is X*^T W* X*
/// with W* = diag(w*_rs p*_rs).
SymMatrix true_fisher_info(const ModelSpec& model);

/// 1 - |det(avg) - det(I*)| / det(I*). Throws DegenerateInformation if det(I*) <= 0.
double efficiency(const SymMatrix& average_info, const SymMatrix& optimal_info);

/// e_i for i = first_step .. last_step.
struct EfficiencyCurve {
  std::size_t first_step = 0;
  std::vector<double> e;

  [[nodiscard]] std::size_t last_step() const { return first_step + e.size() - 1; }
  [[nodiscard]] double at(std::size_t step) const { return e.at(step - first_step); }
};

/// For every i >= n1 the information is re-summed over X_1..X_i under the
/// step-i estimate, so each e_i uses a single consistent theta.
template <class P, class Fisher>
EfficiencyCurve relative_efficiency_with(const Trajectory<P>& traj, const SymMatrix& optimal_info,
                                    Fisher&& fisher) {
  if (!(det(optimal_info) > 0.0)) throw DegenerateInformation("det(I*) must be positive");
  EfficiencyCurve curve;
  curve.first_step = traj.n1;
  for (std::size_t i = traj.n1; i <= traj.records.size(); ++i) {
    const ParamVector& theta = traj.records[i - 1].theta_hat_after;
    SymMatrix total(optimal_info.dim());
    for (std::size_t j = 0; j < i; ++j) total += fisher(theta, traj.records[j].x);
    curve.e.push_back(efficiency(total * (1.0 / static_cast<double>(i)), optimal_info));
  }
  return curve;
}

EfficiencyCurve relative_efficiency(const Trajectory<double>& traj, const SymMatrix& optimal_info,
                                    const ModelSpec& model);
EfficiencyCurve relative_efficiency(const Trajectory<LevelPoint>& traj, const SymMatrix& optimal_info,
                                    const ModelSpec& model);

/// Pointwise mean of equally long curves.
EfficiencyCurve mean_curve(std::span<const EfficiencyCurve> curves);

/// Smallest step whose value reaches target.
std::optional<std::size_t> crossing_step(const EfficiencyCurve& curve, double target);

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> mass;

  [[nodiscard]] double width() const { return (hi - lo) / static_cast<double>(mass.size()); }
  [[nodiscard]] double bin_left(std::size_t k) const { return lo + width() * static_cast<double>(k); }
  [[nodiscard]] std::size_t bin_of(double x) const;
  /// Total mass of the bins within +/- radius bins of the bin holding x.
  [[nodiscard]] double mass_near(double x, std::size_t radius) const;
};

/// Normalized histogram of the Stage-2 design points pooled over trajectories.
Histogram sequential_density(std::span<const Trajectory<double>> trajectories,
                             const ExperimentInterval& omega, std::size_t bins = 100);

/// Share of pooled Stage-2 points whose nearest centre is centres[k].
std::vector<double> mode_masses(std::span<const Trajectory<double>> trajectories,
                                std::span<const double> centres);

/// Pooled Stage-2 allocation proportions in level-point order.
std::array<double, 4> allocation_proportions(std::span<const Trajectory<LevelPoint>> trajectories);

struct NormalitySummary {
  ParamVector mean;
  SymMatrix covariance;
  std::size_t replications = 0;
};

/// z_r = L_r^T (theta_r - theta*) where L_r L_r^T is replication r's
/// cumulative information; reports the sample mean and covariance of z.
NormalitySummary normality_diagnostic(std::span<const ParamVector> estimates, const ParamVector& truth,
                                      std::span<const SymMatrix> cumulative_info);

/// Moments of already standardized vectors.
NormalitySummary moment_summary(std::span<const ParamVector> z);

void write_curve_csv(std::ostream& out, const EfficiencyCurve& curve);
void write_histogram_csv(std::ostream& out, const Histogram& hist);

}  // namespace pics
