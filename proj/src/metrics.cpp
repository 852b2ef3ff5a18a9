#include "pics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "pics/errors.hpp"
#include "pics/optdesign.hpp"

namespace pics {

SymMatrix true_fisher_info(const ModelSpec& model) {
  if (model.is_glm()) {
    const GlmParams beta = GlmParams::from_vector(model.truth);
    const GlmDesign xi = model.kind == ModelKind::GlmC1 ? mandal_c1(beta) : mandal_c2(beta);
    return design_information(xi, [&](const LevelPoint& p) { return fisher_info_glm(beta, p); });
  }
  const NlrKind kind = model.nlr_kind();
  const NlrDesign xi = optimal_design_nlr(kind, model.truth, model.omega);
  return design_information(xi, [&](double x) { return fisher_info_nlr(kind, model.truth, x, model.noise()); });
}

double efficiency(const SymMatrix& average_info, const SymMatrix& optimal_info) {
  const double target = det(optimal_info);
  if (!(target > 0.0)) throw DegenerateInformation("det(I*) must be positive");
  return 1.0 - std::abs((det(average_info) - target) / target);
}

EfficiencyCurve relative_efficiency(const Trajectory<double>& traj, const SymMatrix& optimal_info,
                                    const ModelSpec& model) {
  const NlrKind kind = model.nlr_kind();
  const NoiseSpec noise = model.noise();
  return relative_efficiency_with(traj, optimal_info, [&](const ParamVector& theta, double x) {
    return fisher_info_nlr(kind, theta, x, noise);
  });
}

EfficiencyCurve relative_efficiency(const Trajectory<LevelPoint>& traj, const SymMatrix& optimal_info,
                                    const ModelSpec&) {
  if (!(det(optimal_info) > 0.0)) throw DegenerateInformation("det(I*) must be positive");
  // Points only take four values, so the sums collapse onto running counts.
  EfficiencyCurve curve;
  curve.first_step = traj.n1;
  std::array<double, 4> counts{};
  for (std::size_t j = 0; j + 1 < traj.n1; ++j) counts[traj.records[j].x.index()] += 1.0;
  for (std::size_t i = traj.n1; i <= traj.records.size(); ++i) {
    counts[traj.records[i - 1].x.index()] += 1.0;
    const GlmParams beta = GlmParams::from_vector(traj.records[i - 1].theta_hat_after);
    SymMatrix total(3);
    for (const auto& p : kLevelPoints) total += fisher_info_glm(beta, p) * counts[p.index()];
    curve.e.push_back(efficiency(total * (1.0 / static_cast<double>(i)), optimal_info));
  }
  return curve;
}

EfficiencyCurve mean_curve(std::span<const EfficiencyCurve> curves) {
  if (curves.empty()) return {};
  EfficiencyCurve out;
  out.first_step = curves.front().first_step;
  out.e.assign(curves.front().e.size(), 0.0);
  for (const auto& c : curves) {
    if (c.first_step != out.first_step || c.e.size() != out.e.size()) {
      throw Error("mean_curve: curves cover different steps");
    }
    for (std::size_t k = 0; k < c.e.size(); ++k) out.e[k] += c.e[k];
  }
  for (double& v : out.e) v /= static_cast<double>(curves.size());
  return out;
}

std::optional<std::size_t> crossing_step(const EfficiencyCurve& curve, double target) {
  for (std::size_t k = 0; k < curve.e.size(); ++k) {
    if (curve.e[k] >= target) return curve.first_step + k;
  }
  return std::nullopt;
}

std::size_t Histogram::bin_of(double x) const {
  const auto k = static_cast<std::ptrdiff_t>(std::floor((x - lo) / width()));
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(mass.size()) - 1));
}

double Histogram::mass_near(double x, std::size_t radius) const {
  const std::size_t centre = bin_of(x);
  const std::size_t first = centre >= radius ? centre - radius : 0;
  const std::size_t last = std::min(mass.size() - 1, centre + radius);
  double total = 0.0;
  for (std::size_t k = first; k <= last; ++k) total += mass[k];
  return total;
}

Histogram sequential_density(std::span<const Trajectory<double>> trajectories,
                             const ExperimentInterval& omega, std::size_t bins) {
  Histogram h{omega.x_min, omega.x_max, std::vector<double>(bins, 0.0)};
  double count = 0.0;
  for (const auto& traj : trajectories) {
    for (std::size_t j = traj.n1; j < traj.records.size(); ++j) {
      h.mass[h.bin_of(traj.records[j].x)] += 1.0;
      count += 1.0;
    }
  }
  if (count > 0.0)
    for (double& m : h.mass) m /= count;
  return h;
}

std::vector<double> mode_masses(std::span<const Trajectory<double>> trajectories,
                                std::span<const double> centres) {
  std::vector<double> mass(centres.size(), 0.0);
  double count = 0.0;
  for (const auto& traj : trajectories) {
    for (std::size_t j = traj.n1; j < traj.records.size(); ++j) {
      const double x = traj.records[j].x;
      std::size_t nearest = 0;
      for (std::size_t k = 1; k < centres.size(); ++k)
        if (std::abs(x - centres[k]) < std::abs(x - centres[nearest])) nearest = k;
      mass[nearest] += 1.0;
      count += 1.0;
    }
  }
  if (count > 0.0)
    for (double& m : mass) m /= count;
  return mass;
}

std::array<double, 4> allocation_proportions(std::span<const Trajectory<LevelPoint>> trajectories) {
  std::array<double, 4> p{};
  double count = 0.0;
  for (const auto& traj : trajectories) {
    for (std::size_t j = traj.n1; j < traj.records.size(); ++j) {
      p[traj.records[j].x.index()] += 1.0;
      count += 1.0;
    }
  }
  if (count > 0.0)
    for (double& v : p) v /= count;
  return p;
}

NormalitySummary moment_summary(std::span<const ParamVector> z) {
  if (z.size() < 2) throw InsufficientData("moment summary needs at least two vectors");
  const std::size_t d = z.front().size();
  NormalitySummary s;
  s.replications = z.size();
  s.mean = ParamVector(d, 0.0);
  for (const auto& v : z)
    for (std::size_t k = 0; k < d; ++k) s.mean[k] += v[k] / static_cast<double>(z.size());
  s.covariance = SymMatrix(d);
  for (const auto& v : z) {
    ParamVector c(d);
    for (std::size_t k = 0; k < d; ++k) c[k] = v[k] - s.mean[k];
    s.covariance.add_outer(c, 1.0 / static_cast<double>(z.size() - 1));
  }
  return s;
}

NormalitySummary normality_diagnostic(std::span<const ParamVector> estimates, const ParamVector& truth,
                                      std::span<const SymMatrix> cumulative_info) {
  if (estimates.size() != cumulative_info.size()) throw Error("normality_diagnostic: size mismatch");
  std::vector<ParamVector> z;
  z.reserve(estimates.size());
  for (std::size_t r = 0; r < estimates.size(); ++r) {
    ParamVector diff(truth.size());
    for (std::size_t k = 0; k < truth.size(); ++k) diff[k] = estimates[r][k] - truth[k];
    z.push_back(Cholesky(cumulative_info[r]).transpose_multiply(diff));
  }
  return moment_summary(z);
}

void write_curve_csv(std::ostream& out, const EfficiencyCurve& curve) {
  out << "step,value\n";
  char buf[64];
  for (std::size_t k = 0; k < curve.e.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", curve.first_step + k, curve.e[k]);
    out << buf;
  }
}

void write_histogram_csv(std::ostream& out, const Histogram& hist) {
  out << "bin_left,bin_right,mass\n";
  char buf[96];
  for (std::size_t k = 0; k < hist.mass.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", hist.bin_left(k), hist.bin_left(k + 1), hist.mass[k]);
    out << buf;
  }
}

}  // namespace pics
