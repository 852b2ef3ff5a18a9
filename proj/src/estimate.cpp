#include "pics/estimate.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "pics/errors.hpp"

namespace pics {

ParamVector Box::project(ParamVector x) const {
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::clamp(x[k], lower[k], upper[k]);
  return x;
}

namespace {

struct Vertex {
  ParamVector x;
  double f;
};

double safe_eval(const Objective& f, const ParamVector& x) {
  const double v = f(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::max();
}

ParamVector affine(const ParamVector& centroid, const ParamVector& worst, double t) {
  // centroid + t * (centroid - worst)
  ParamVector out(centroid.size());
  for (std::size_t k = 0; k < centroid.size(); ++k) out[k] = centroid[k] + t * (centroid[k] - worst[k]);
  return out;
}

FitResult nelder_mead(const Objective& f, const ParamVector& start, const Box& box,
                      const MinimizeOptions& opts) {
  const std::size_t n = start.size();
  std::vector<Vertex> simplex;
  simplex.reserve(n + 1);
  const ParamVector x0 = box.project(start);
  simplex.push_back({x0, safe_eval(f, x0)});
  for (std::size_t k = 0; k < n; ++k) {
    ParamVector x = x0;
    const double step = x[k] != 0.0 ? opts.initial_simplex * std::abs(x[k]) : 0.00025;
    x[k] += step;
    if (x[k] > box.upper[k]) x[k] = x0[k] - step;
    x = box.project(x);
    simplex.push_back({x, safe_eval(f, x)});
  }

  const int max_iter = opts.max_iter_per_dim * static_cast<int>(n);
  int iter = 0;
  bool converged = false;
  auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
  for (; iter < max_iter; ++iter) {
    std::sort(simplex.begin(), simplex.end(), by_value);
    const Vertex& best = simplex.front();
    double diameter = 0.0;
    for (std::size_t v = 1; v <= n; ++v) {
      for (std::size_t k = 0; k < n; ++k) {
        diameter = std::max(diameter, std::abs(simplex[v].x[k] - best.x[k]));
      }
    }
    if (diameter < opts.diameter_tol * (1.0 + norm(best.x))) {
      converged = true;
      break;
    }

    ParamVector centroid(n, 0.0);
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[v].x[k] / static_cast<double>(n);
    const Vertex worst = simplex[n];

    const ParamVector xr = box.project(affine(centroid, worst.x, 1.0));
    const double fr = safe_eval(f, xr);
    if (fr < simplex[0].f) {
      const ParamVector xe = box.project(affine(centroid, worst.x, 2.0));
      const double fe = safe_eval(f, xe);
      simplex[n] = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
      continue;
    }
    if (fr < simplex[n - 1].f) {
      simplex[n] = {xr, fr};
      continue;
    }
    const bool outside = fr < worst.f;
    const ParamVector xc = box.project(affine(centroid, worst.x, outside ? 0.5 : -0.5));
    const double fc = safe_eval(f, xc);
    if (fc < (outside ? fr : worst.f)) {
      simplex[n] = {xc, fc};
      continue;
    }
    for (std::size_t v = 1; v <= n; ++v) {
      ParamVector x(n);
      for (std::size_t k = 0; k < n; ++k) x[k] = simplex[0].x[k] + 0.5 * (simplex[v].x[k] - simplex[0].x[k]);
      simplex[v] = {x, safe_eval(f, x)};
    }
  }
  const auto it = std::min_element(simplex.begin(), simplex.end(), by_value);
  FitResult result;
  result.theta_hat = it->x;
  result.objective = it->f;
  result.converged = converged;
  result.iterations = iter;
  return result;
}

bool on_boundary(const ParamVector& x, const Box& box, double tol) {
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double scale = tol * (1.0 + std::abs(x[k]));
    if (x[k] - box.lower[k] < scale || box.upper[k] - x[k] < scale) return true;
  }
  return false;
}

}  // namespace

FitResult local_minimize(const Objective& f, const ParamVector& init, const Box& bounds,
                         const MinimizeOptions& opts) {
  FitResult best;
  best.objective = std::numeric_limits<double>::infinity();
  int total_iterations = 0;
  for (int s = 0; s < std::max(1, opts.starts); ++s) {
    ParamVector start = init;
    if (s > 0) {
      // Alternating sign pattern, flipped between successive starts.
      for (std::size_t k = 0; k < start.size(); ++k) {
        const double sign = ((k + static_cast<std::size_t>(s)) % 2 == 0) ? 1.0 : -1.0;
        start[k] *= 1.0 + sign * opts.perturbation;
      }
    }
    FitResult r = nelder_mead(f, start, bounds, opts);
    total_iterations += r.iterations;
    if (r.objective < best.objective) best = r;
  }
  best.iterations = total_iterations;
  return best;
}

Box nls_bounds(const NlrKind& kind, const ExperimentInterval& omega) {
  if (kind.tag == NlrModel::M3) {
    return {{1e-3, 1e-3, omega.x_min + 1.0}, {1e3, 1e3, omega.x_max - 1.0}};
  }
  return {{1e-3, 1e-3}, {1e3, 1e3}};
}

double residual_sum_of_squares(const NlrKind& kind, const ParamVector& theta,
                               std::span<const NlrObservation> data) {
  double sse = 0.0;
  for (const auto& obs : data) {
    const double r = obs.y - growth_mean(kind, theta, obs.x);
    sse += r * r;
  }
  return sse;
}

namespace {

struct ProfilePoint {
  ParamVector theta;
  double sse = std::numeric_limits<double>::infinity();
};

/// Least squares over (a1, a2) with the change point (M2/M3) held fixed.
/// g is linear in a1, so a1 is solved in closed form and a2 is searched on a
/// log grid followed by a Brent refinement in the best cell.
ProfilePoint profile_alpha(const NlrKind& kind, std::span<const NlrObservation> data, const Box& box,
                           double x0, std::size_t grid, bool refine = true) {
  auto evaluate = [&](double log_a2) {
    ProfilePoint pt;
    pt.theta = ParamVector(kind.dim());
    pt.theta[0] = 1.0;
    pt.theta[1] = std::exp(log_a2);
    if (kind.tag == NlrModel::M3) pt.theta[2] = x0;
    double shape_y = 0.0;
    double shape_sq = 0.0;
    for (const auto& obs : data) {
      const double h = growth_mean(kind, pt.theta, obs.x);
      shape_y += h * obs.y;
      shape_sq += h * h;
    }
    if (!(shape_sq > 0.0)) return pt;
    pt.theta[0] = std::clamp(shape_y / shape_sq, box.lower[0], box.upper[0]);
    pt.sse = residual_sum_of_squares(kind, pt.theta, data);
    return pt;
  };
  const double lo = std::log(box.lower[1]);
  const double hi = std::log(box.upper[1]);
  const double step = (hi - lo) / static_cast<double>(grid - 1);
  ProfilePoint best;
  std::size_t best_index = 0;
  for (std::size_t g = 0; g < grid; ++g) {
    ProfilePoint pt = evaluate(lo + step * static_cast<double>(g));
    if (pt.sse < best.sse) {
      best = pt;
      best_index = g;
    }
  }
  if (!std::isfinite(best.sse)) throw InsufficientData("no informative observations for the fit");
  if (!refine) return best;
  const double centre = lo + step * static_cast<double>(best_index);
  const auto [log_a2, sse] = boost::math::tools::brent_find_minima(
      [&](double t) { return evaluate(t).sse; }, std::max(lo, centre - step), std::min(hi, centre + step), 30);
  if (sse < best.sse) best = evaluate(log_a2);
  return best;
}

/// Change point on the profile grid with the smallest profiled residual sum
/// of squares. exp(-a2 / x_j) does not depend on x0, so it is tabulated once
/// per a2 and the scan over x0 only needs multiply-adds.
double coarse_change_point(std::span<const NlrObservation> data, const Box& box, std::size_t x0_grid,
                           std::size_t a2_grid) {
  const double lo = std::log(box.lower[1]);
  const double hi = std::log(box.upper[1]);
  const std::size_t n = data.size();
  std::vector<double> a2(a2_grid);
  std::vector<double> table(a2_grid * n);
  double yy = 0.0;
  for (const auto& obs : data) yy += obs.y * obs.y;
  for (std::size_t g = 0; g < a2_grid; ++g) {
    a2[g] = std::exp(lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(a2_grid - 1));
    for (std::size_t j = 0; j < n; ++j) table[g * n + j] = std::exp(-a2[g] / data[j].x);
  }
  x0_grid = std::max<std::size_t>(2, x0_grid);
  double best_x0 = box.lower[2];
  double best_sse = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < x0_grid; ++k) {
    const double x0 = box.lower[2] + (box.upper[2] - box.lower[2]) * static_cast<double>(k) /
                                         static_cast<double>(x0_grid - 1);
    for (std::size_t g = 0; g < a2_grid; ++g) {
      const double e0 = std::exp(-a2[g] / x0);
      const double slope = e0 * a2[g] / (x0 * x0);
      double hy = 0.0;
      double hh = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double x = data[j].x;
        const double h = x < x0 ? table[g * n + j] : e0 + slope * (x - x0);
        hy += h * data[j].y;
        hh += h * h;
      }
      if (!(hh > 0.0)) continue;
      const double a1 = hy / hh;
      double sse;
      if (a1 >= box.lower[0] && a1 <= box.upper[0]) {
        sse = yy - hy * a1;
      } else {
        const double c = std::clamp(a1, box.lower[0], box.upper[0]);
        sse = yy - 2.0 * c * hy + c * c * hh;
      }
      if (sse < best_sse) {
        best_sse = sse;
        best_x0 = x0;
      }
    }
  }
  return best_x0;
}

FitResult polish(const Objective& f, const ProfilePoint& seed, const Box& box, const MinimizeOptions& opts) {
  FitResult r = local_minimize(f, seed.theta, box, opts);
  if (seed.sse < r.objective) {
    r.theta_hat = seed.theta;
    r.objective = seed.sse;
  }
  return r;
}

}  // namespace

FitResult nls_fit(const NlrKind& kind, const ExperimentInterval& omega,
                  std::span<const NlrObservation> data, const std::optional<ParamVector>& init,
                  const NlsOptions& opts) {
  const std::size_t d = kind.dim();
  if (data.size() < d + 1) throw InsufficientData("least squares needs at least d + 1 observations");
  const bool all_same = std::all_of(data.begin(), data.end(),
                                    [&](const NlrObservation& o) { return o.x == data.front().x; });
  if (all_same) throw InsufficientData("all observations share a single design point");

  const Box box = nls_bounds(kind, omega);
  const Objective sse = [&](const ParamVector& theta) {
    return residual_sum_of_squares(kind, theta, data);
  };

  if (kind.tag != NlrModel::M3) {
    if (init) return local_minimize(sse, *init, box, opts.minimize);
    return polish(sse, profile_alpha(kind, data, box, kind.x0_known, opts.alpha2_grid), box, opts.minimize);
  }

  // The M3 objective has separated basins in x0 (a design with no points
  // below the change point leaves it unidentified), so every fit profiles
  // over a grid of change points; a warm start only adds a candidate.
  const double x0 = coarse_change_point(data, box, opts.change_point_grid, opts.alpha2_grid);
  FitResult result = polish(sse, profile_alpha(kind, data, box, x0, opts.alpha2_grid), box, opts.minimize);
  if (init) {
    FitResult warm = local_minimize(sse, *init, box, opts.minimize);
    warm.iterations += result.iterations;
    if (warm.objective <= result.objective) return warm;
    result.iterations = warm.iterations;
  }
  return result;
}

void LevelCounts::add(const LevelPoint& p, int y) {
  ++trials[p.index()];
  successes[p.index()] += y;
}

int LevelCounts::total() const { return std::accumulate(trials.begin(), trials.end(), 0); }

LevelCounts LevelCounts::from(std::span<const GlmObservation> data) {
  LevelCounts c;
  for (const auto& obs : data) c.add(obs.point, obs.y);
  return c;
}

namespace {

double softplus(double eta) { return std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta))); }

}  // namespace

double glm_log_likelihood(const GlmParams& beta, const LevelCounts& counts) {
  double ll = 0.0;
  for (const auto& p : kLevelPoints) {
    const std::size_t k = p.index();
    if (counts.trials[k] == 0) continue;
    const double eta = linear_predictor(beta, p);
    ll += counts.successes[k] * eta - counts.trials[k] * softplus(eta);
  }
  return ll;
}

FitResult logistic_mle_c1(const LevelCounts& counts) {
  if (counts.total() == 0) throw InsufficientData("logistic fit needs at least one observation");
  constexpr double kEdge = kEqualCoefficientBound - 1e-6;
  auto negll = [&](double b) { return -glm_log_likelihood({b, b, b}, counts); };
  boost::uintmax_t max_iter = 200;
  const auto [b, value] = boost::math::tools::brent_find_minima(negll, -kEdge, kEdge, 40, max_iter);
  FitResult r;
  r.iterations = static_cast<int>(max_iter);
  r.converged = max_iter < 200;
  double beta = b;
  if (kEdge - std::abs(beta) < 1e-5) {
    beta = std::copysign(kEdge, beta);
    r.boundary = true;
  }
  r.theta_hat = {beta, beta, beta};
  r.objective = r.boundary ? negll(beta) : value;
  return r;
}

FitResult logistic_mle_c1(std::span<const GlmObservation> data) {
  return logistic_mle_c1(LevelCounts::from(data));
}

FitResult logistic_mle_c2(const LevelCounts& counts, const std::optional<ParamVector>& init) {
  if (counts.total() == 0) throw InsufficientData("logistic fit needs at least one observation");
  constexpr double kLogBound = 10.0;
  const Box box{{-kLogBound, -kLogBound}, {kLogBound, kLogBound}};
  FitResult best;
  best.objective = std::numeric_limits<double>::infinity();
  int iterations = 0;
  double best_sign = 1.0;
  for (const double sign : {1.0, -1.0}) {
    const Objective negll = [&](const ParamVector& u) {
      return -glm_log_likelihood({sign * std::exp(u[0]), sign * std::exp(u[1]), 0.0}, counts);
    };
    ParamVector start{std::log(0.5), std::log(0.5)};
    if (init && (*init)[0] * sign > 0.0 && (*init)[1] * sign > 0.0) {
      start = {std::log(std::abs((*init)[0])), std::log(std::abs((*init)[1]))};
    }
    FitResult r = local_minimize(negll, start, box);
    iterations += r.iterations;
    if (r.objective < best.objective) {
      best = r;
      best_sign = sign;
    }
  }
  const ParamVector u = best.theta_hat;
  best.boundary = on_boundary(u, box, 1e-6);
  best.theta_hat = {best_sign * std::exp(u[0]), best_sign * std::exp(u[1]), 0.0};
  best.iterations = iterations;
  return best;
}

FitResult logistic_mle_c2(std::span<const GlmObservation> data) {
  return logistic_mle_c2(LevelCounts::from(data));
}

}  // namespace pics
