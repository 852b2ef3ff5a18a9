#pragma once

// Two-stage sequential design engines.
//
// Stage 1 draws n1 points from an initial design and fits the first
// estimate. Stage 2 adds one point per step, chosen either by maximizing the
// determinant of the updated information matrix (CM) or by drawing from the
// closed-form optimal design evaluated at the current estimate (PICS, and
// its cycle-balanced variant), then refits.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pics/config.hpp"
#include "pics/errors.hpp"
#include "pics/estimate.hpp"
#include "pics/optdesign.hpp"

namespace pics {

template <class P>
struct TrialRecord {
  std::size_t index = 0;  // 1-based
  P x{};
  double y = 0.0;
  ParamVector theta_hat_after;  // empty for index < n1
  double det_cum_info = std::numeric_limits<double>::quiet_NaN();
  double step_ms = 0.0;
};

template <class P>
struct Trajectory {
  std::vector<TrialRecord<P>> records;
  std::size_t n1 = 0;
  double static_ms = 0.0;
  double sequential_ms = 0.0;
  std::optional<std::size_t> stop_index;
  std::size_t projections = 0;  // plug-in estimates moved onto the admissible set
  std::vector<std::string> warnings;

  [[nodiscard]] double total_ms() const { return static_ms + sequential_ms; }
  [[nodiscard]] const ParamVector& final_estimate() const { return records.back().theta_hat_after; }
  [[nodiscard]] std::size_t size() const { return records.size(); }
};

/// Growth model problem: owns the observed data and the true model.
class NlrProblem {
 public:
  using Point = double;
  using Design = NlrDesign;

  explicit NlrProblem(ModelSpec spec, NlsOptions fit_options = {});

  [[nodiscard]] const ModelSpec& spec() const { return spec_; }
  [[nodiscard]] std::size_t dim() const { return kind_.dim(); }
  [[nodiscard]] SymMatrix fisher(const ParamVector& theta, double x) const;
  double observe(double x, Rng& rng) const;
  std::vector<double> static_design(InitialDesign design, std::size_t n1, Rng& rng) const;
  void record(double x, double y) { data_.push_back({x, y}); }
  [[nodiscard]] FitResult refit(const std::optional<ParamVector>& warm) const;
  /// Closed-form design at theta. Throws DegenerateDesign.
  [[nodiscard]] NlrDesign plug_in_design(const ParamVector& theta) const;
  /// Growth models have no constraint set; returns theta unchanged.
  [[nodiscard]] ParamVector project(const ParamVector& theta) const { return theta; }
  /// argmax det(cum + I(theta, x)) over a uniform grid, refined by golden
  /// section inside the best grid cell. Ties go to the lowest x.
  [[nodiscard]] double cm_select(const SymMatrix& cum, const ParamVector& theta, std::size_t grid) const;

 private:
  ModelSpec spec_;
  NlrKind kind_;
  NlsOptions fit_options_;
  std::vector<NlrObservation> data_;
};

/// Factorial logistic problem under one of the two coefficient constraints.
class GlmProblem {
 public:
  using Point = LevelPoint;
  using Design = GlmDesign;

  explicit GlmProblem(ModelSpec spec);

  [[nodiscard]] const ModelSpec& spec() const { return spec_; }
  [[nodiscard]] std::size_t dim() const { return 3; }
  [[nodiscard]] SymMatrix fisher(const ParamVector& theta, const LevelPoint& p) const;
  int observe(const LevelPoint& p, Rng& rng) const;
  std::vector<LevelPoint> static_design(InitialDesign design, std::size_t n1, Rng& rng) const;
  void record(const LevelPoint& p, double y) { counts_.add(p, static_cast<int>(y)); }
  [[nodiscard]] FitResult refit(const std::optional<ParamVector>& warm) const;
  /// Throws ConstraintViolated / DegenerateDesign.
  [[nodiscard]] GlmDesign plug_in_design(const ParamVector& theta) const;
  /// C1: clamp |b| below 0.8314. C2: zero beta2, force a common sign with
  /// magnitudes at least 1e-6.
  [[nodiscard]] ParamVector project(const ParamVector& theta) const;
  /// Exact argmax over the four level points; ties go to the first in order.
  [[nodiscard]] LevelPoint cm_select(const SymMatrix& cum, const ParamVector& theta,
                                     std::size_t grid) const;
  [[nodiscard]] const LevelCounts& counts() const { return counts_; }

 private:
  ModelSpec spec_;
  LevelCounts counts_;
};

struct EngineOptions {
  std::size_t cm_grid = 400;
};

template <class Problem>
class SequentialEngine {
 public:
  using Point = typename Problem::Point;
  using Design = typename Problem::Design;
  using Clock = std::chrono::steady_clock;

  SequentialEngine(Problem problem, Method method, std::uint64_t seed, EngineOptions options = {})
      : problem_(std::move(problem)), method_(method), rng_(seed), options_(options) {}

  [[nodiscard]] const Trajectory<Point>& trajectory() const { return traj_; }
  Trajectory<Point> take_trajectory() { return std::move(traj_); }
  [[nodiscard]] const SymMatrix& cum_info() const { return cum_info_; }
  [[nodiscard]] const ParamVector& estimate() const { return theta_; }
  [[nodiscard]] const Problem& problem() const { return problem_; }
  [[nodiscard]] std::size_t steps() const { return traj_.records.size(); }

  void run_static_stage(InitialDesign design, std::size_t n1) {
    if (n1 < problem_.dim() + 2) throw InsufficientData("static stage needs n1 >= d + 2");
    const auto start = Clock::now();
    const std::vector<Point> points = problem_.static_design(design, n1, rng_);
    for (const Point& x : points) {
      const double y = problem_.observe(x, rng_);
      problem_.record(x, y);
      TrialRecord<Point> rec;
      rec.index = traj_.records.size() + 1;
      rec.x = x;
      rec.y = y;
      traj_.records.push_back(std::move(rec));
    }
    const FitResult fit = problem_.refit(std::nullopt);
    theta_ = fit.theta_hat;
    rebuild_information();
    auto& last = traj_.records.back();
    last.theta_hat_after = theta_;
    last.det_cum_info = current_det_;
    traj_.n1 = n1;
    traj_.static_ms = elapsed_ms(start);
    last.step_ms = traj_.static_ms;
  }

  void cm_step() {
    const auto start = Clock::now();
    const Point x = problem_.cm_select(cum_info_, theta_, options_.cm_grid);
    observe_and_refit(x, start);
  }

  void pics_step() {
    const auto start = Clock::now();
    Point x{};
    if (method_ == Method::BalancedPICS) {
      if (!schedule_) schedule_.emplace();
      x = schedule_->next([&] { return plug_in(); }, rng_);
    } else {
      x = draw_point(plug_in(), rng_);
    }
    observe_and_refit(x, start);
  }

  void step() {
    if (method_ == Method::CM) {
      cm_step();
    } else {
      pics_step();
    }
  }

  /// Relative change of the information determinant over the last step.
  [[nodiscard]] bool stopping_check(double delta) const {
    if (traj_.records.size() < traj_.n1 + 2) return false;
    if (!(previous_det_ > 1e-300)) {
      throw DegenerateInformation("stopping rule: previous information determinant is not positive");
    }
    return std::abs(current_det_ - previous_det_) / previous_det_ < delta;
  }

  Trajectory<Point> run(InitialDesign design, std::size_t n1, std::size_t n,
                        std::optional<double> delta_stop = std::nullopt) {
    if (n < n1) throw ConfigError("n: must be at least n1");
    run_static_stage(design, n1);
    for (std::size_t i = n1 + 1; i <= n; ++i) {
      try {
        step();
      } catch (const Error& e) {
        throw Error("step " + std::to_string(i) + ": " + e.what());
      }
      if (delta_stop && stopping_check(*delta_stop)) {
        traj_.stop_index = i;
        break;
      }
    }
    return take_trajectory();
  }

 private:
  static double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  }

  void rebuild_information() {
    SymMatrix total(problem_.dim());
    for (const auto& rec : traj_.records) total += problem_.fisher(theta_, rec.x);
    cum_info_ = total;
    previous_det_ = current_det_;
    current_det_ = det(cum_info_);
  }

  Design plug_in() {
    try {
      last_design_ = problem_.plug_in_design(theta_);
    } catch (const Error& first) {
      ++traj_.projections;
      try {
        last_design_ = problem_.plug_in_design(problem_.project(theta_));
        note("step " + std::to_string(traj_.records.size() + 1) + ": estimate projected (" +
             first.what() + ")");
      } catch (const Error& second) {
        if (!last_design_) throw;
        note("step " + std::to_string(traj_.records.size() + 1) + ": reused previous design (" +
             second.what() + ")");
      }
    }
    return *last_design_;
  }

  void note(std::string message) {
    constexpr std::size_t kMaxWarnings = 20;
    if (traj_.warnings.size() < kMaxWarnings) traj_.warnings.push_back(std::move(message));
  }

  void observe_and_refit(const Point& x, Clock::time_point start) {
    const double y = problem_.observe(x, rng_);
    problem_.record(x, y);
    TrialRecord<Point> rec;
    rec.index = traj_.records.size() + 1;
    rec.x = x;
    rec.y = y;
    traj_.records.push_back(std::move(rec));
    theta_ = problem_.refit(theta_).theta_hat;
    rebuild_information();
    auto& last = traj_.records.back();
    last.theta_hat_after = theta_;
    last.det_cum_info = current_det_;
    last.step_ms = elapsed_ms(start);
    traj_.sequential_ms += last.step_ms;
  }

  Problem problem_;
  Method method_;
  Rng rng_;
  EngineOptions options_;
  Trajectory<Point> traj_;
  SymMatrix cum_info_;
  ParamVector theta_;
  double current_det_ = 0.0;
  double previous_det_ = 0.0;
  std::optional<BalancedScheduler<Point>> schedule_;
  std::optional<Design> last_design_;
};

/// One seeded trajectory of the configured method.
Trajectory<double> run_nlr(const RunConfig& config, std::uint64_t seed);
Trajectory<LevelPoint> run_glm(const RunConfig& config, std::uint64_t seed);

}  // namespace pics
