#pragma once

// Replication orchestration, configuration parsing and artifact output.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pics/config.hpp"
#include "pics/engine.hpp"
#include "pics/metrics.hpp"

namespace pics {

/// Builds a validated RunConfig from a JSON object whose keys mirror the
/// RunConfig fields (see README for the schema). Absent fields take the
/// defaults of the chosen model. Throws ConfigError naming the field.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_file(const std::filesystem::path& path);
nlohmann::json config_to_json(const RunConfig& config);

struct ReplicationFailure {
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  std::string message;
};

template <class P>
struct ReplicationSet {
  std::vector<std::size_t> replication_ids;  // ascending
  std::vector<Trajectory<P>> trajectories;   // aligned with replication_ids
  std::vector<ReplicationFailure> failures;
};

/// Runs config.replications trajectories with seeds seed + r on a worker
/// pool. Throws Error when more than 10% of the replications fail.
ReplicationSet<double> run_replications_nlr(const RunConfig& config);
ReplicationSet<LevelPoint> run_replications_glm(const RunConfig& config);

struct ReplicationSummary {
  RunConfig config;
  std::size_t completed = 0;
  std::vector<ReplicationFailure> failures;
  EfficiencyCurve mean_efficiency;      // over the steps every trajectory reached
  double mean_final_efficiency = 0.0;   // at the last common step
  double mean_midpoint_efficiency = 0.0;
  std::vector<double> total_ms;         // per replication, compute only
  double median_total_ms = 0.0;
  ParamVector estimate_mean;
  SymMatrix estimate_covariance;
  std::optional<std::array<double, 4>> allocation;  // GLM
  std::optional<Histogram> density;                 // growth models
  std::vector<std::size_t> stop_indices;
  std::size_t projections = 0;
};

/// Summarizes replication results; exposed so callers holding trajectories
/// can aggregate without rerunning.
ReplicationSummary summarize(const RunConfig& config, const ReplicationSet<double>& set);
ReplicationSummary summarize(const RunConfig& config, const ReplicationSet<LevelPoint>& set);

/// Runs, aggregates and, when out_dir is given, writes
/// trajectories.csv, efficiency.csv, density.csv (growth models),
/// allocation.csv (GLM), summary.json and, with record_timing, timing.json.
ReplicationSummary run_experiment(const RunConfig& config,
                                  const std::optional<std::filesystem::path>& out_dir = std::nullopt);

struct MethodComparison {
  Method method = Method::PICS;
  double median_total_ms = 0.0;
  std::optional<std::size_t> crossing;
  double final_efficiency = 0.0;
};

struct ComparisonReport {
  double target = 0.6;
  std::vector<MethodComparison> rows;
};

/// True when the configs agree on everything except the method.
bool same_except_method(const RunConfig& a, const RunConfig& b);

/// Throws ConfigMismatch when the summaries' configs differ beyond method.
ComparisonReport compare_summaries(std::span<const ReplicationSummary> summaries, double target);
ComparisonReport compare_methods(std::span<const RunConfig> configs, double target,
                                 const std::optional<std::filesystem::path>& out_dir = std::nullopt);
nlohmann::json comparison_to_json(const ComparisonReport& report);

/// Closed-form design versus the brute-force grid optimum.
struct OracleReport {
  ModelKind model = ModelKind::M1;
  std::vector<double> closed_support;   // growth models
  std::vector<double> oracle_support;
  std::vector<double> closed_weights;
  std::vector<double> oracle_weights;   // GLM proportions
  double closed_criterion = 0.0;
  double oracle_criterion = 0.0;

  /// oracle / closed - 1.
  [[nodiscard]] double criterion_excess() const { return oracle_criterion / closed_criterion - 1.0; }
  [[nodiscard]] double max_support_gap() const;
  [[nodiscard]] double max_weight_gap() const;
};

OracleReport oracle_check(const ModelSpec& model);
nlohmann::json oracle_to_json(const OracleReport& report);

/// Closed-form design at theta as JSON.
std::string design_json(const ModelSpec& model, const ParamVector& theta);

void write_trajectories_csv(std::ostream& out, const ReplicationSet<double>& set, bool with_timing);
void write_trajectories_csv(std::ostream& out, const ReplicationSet<LevelPoint>& set, bool with_timing);

}  // namespace pics
