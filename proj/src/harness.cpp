#include "pics/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include "pics/errors.hpp"
#include "pics/optdesign.hpp"

namespace pics {

using nlohmann::json;

namespace {

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "model",    "method", "n1",           "n",        "initial_design", "true_params",
      "sigma2",   "x0_known", "x_min",      "x_max",    "seed",           "replications",
      "delta_stop", "cm_grid", "threads",   "record_timing"};
  return keys;
}

template <class T>
T field(const json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

std::size_t count_field(const json& doc, const char* key) {
  const json& v = doc.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(std::string(key) + ": must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

std::size_t worker_count(const RunConfig& config) {
  std::size_t threads = config.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  return std::min(threads, config.replications);
}

template <class P, class Runner>
ReplicationSet<P> run_pool(const RunConfig& config, Runner&& runner) {
  validate(config);
  const std::size_t reps = config.replications;
  std::vector<std::optional<Trajectory<P>>> slots(reps);
  std::vector<std::optional<std::string>> errors(reps);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t r = next++; r < reps; r = next++) {
      try {
        slots[r] = runner(config, config.seed + r);
      } catch (const std::exception& e) {
        errors[r] = e.what();
      }
    }
  };
  const std::size_t workers = worker_count(config);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  ReplicationSet<P> set;
  for (std::size_t r = 0; r < reps; ++r) {
    if (slots[r]) {
      set.replication_ids.push_back(r);
      set.trajectories.push_back(std::move(*slots[r]));
    } else {
      set.failures.push_back({r, config.seed + r, errors[r].value_or("unknown failure")});
    }
  }
  if (set.failures.size() * 10 > reps) {
    const auto& f = set.failures.front();
    throw Error(std::to_string(set.failures.size()) + " of " + std::to_string(reps) +
                " replications failed (first: replication " + std::to_string(f.replication) +
                ", seed " + std::to_string(f.seed) + ": " + f.message + ")");
  }
  return set;
}

template <class P>
void fill_common(ReplicationSummary& s, const ReplicationSet<P>& set, const ModelSpec& model) {
  s.completed = set.trajectories.size();
  s.failures = set.failures;
  if (set.trajectories.empty()) return;

  const SymMatrix optimal = true_fisher_info(model);
  std::vector<EfficiencyCurve> curves;
  curves.reserve(set.trajectories.size());
  std::size_t common = std::numeric_limits<std::size_t>::max();
  for (const auto& t : set.trajectories) {
    curves.push_back(relative_efficiency(t, optimal, model));
    common = std::min(common, curves.back().e.size());
  }
  for (auto& c : curves) c.e.resize(common);
  s.mean_efficiency = mean_curve(curves);
  s.mean_final_efficiency = s.mean_efficiency.e.back();
  const std::size_t mid = (s.mean_efficiency.first_step + s.mean_efficiency.last_step()) / 2;
  s.mean_midpoint_efficiency = s.mean_efficiency.at(mid);

  const std::size_t d = model.dim();
  std::vector<double> mean(d, 0.0);
  for (const auto& t : set.trajectories)
    for (std::size_t k = 0; k < d; ++k) mean[k] += t.final_estimate()[k];
  for (double& v : mean) v /= static_cast<double>(s.completed);
  SymMatrix cov(d);
  if (s.completed >= 2) {
    for (const auto& t : set.trajectories) {
      ParamVector dev(d);
      for (std::size_t k = 0; k < d; ++k) dev[k] = t.final_estimate()[k] - mean[k];
      cov.add_outer(dev, 1.0 / static_cast<double>(s.completed - 1));
    }
  }
  s.estimate_mean = ParamVector(mean);
  s.estimate_covariance = cov;

  for (const auto& t : set.trajectories) {
    s.total_ms.push_back(t.total_ms());
    if (t.stop_index) s.stop_indices.push_back(*t.stop_index);
    s.projections += t.projections;
  }
  s.median_total_ms = median(s.total_ms);
}

json matrix_json(const SymMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.dim(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.dim(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json summary_json(const ReplicationSummary& s) {
  json doc;
  doc["config"] = config_to_json(s.config);
  doc["completed"] = s.completed;
  json failures = json::array();
  for (const auto& f : s.failures)
    failures.push_back({{"replication", f.replication}, {"seed", f.seed}, {"message", f.message}});
  doc["failures"] = failures;
  if (s.completed == 0) return doc;
  doc["efficiency"] = {{"first_step", s.mean_efficiency.first_step},
                       {"last_step", s.mean_efficiency.last_step()},
                       {"final", s.mean_final_efficiency},
                       {"midpoint", s.mean_midpoint_efficiency}};
  doc["estimate"] = {{"mean", s.estimate_mean.to_vector()},
                     {"covariance", matrix_json(s.estimate_covariance)}};
  if (s.allocation) doc["allocation"] = *s.allocation;
  doc["stop_indices"] = s.stop_indices;
  doc["projections"] = s.projections;
  return doc;
}

template <class P>
json timing_json(const ReplicationSet<P>& set) {
  json reps = json::array();
  std::vector<double> totals;
  for (std::size_t k = 0; k < set.trajectories.size(); ++k) {
    const auto& t = set.trajectories[k];
    reps.push_back({{"replication", set.replication_ids[k]},
                    {"static_ms", t.static_ms},
                    {"sequential_ms", t.sequential_ms},
                    {"total_ms", t.total_ms()}});
    totals.push_back(t.total_ms());
  }
  return {{"median_total_ms", median(totals)}, {"replications", reps}};
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void write_json(const std::filesystem::path& path, const json& doc) {
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
}

void write_point(std::ostream& out, double x) { out << format_double(x); }
void write_point(std::ostream& out, const LevelPoint& p) { out << p.x1 << ',' << p.x2; }

template <class P>
void write_trajectories(std::ostream& out, const ReplicationSet<P>& set, bool with_timing,
                        const char* point_header) {
  std::size_t d = 0;
  if (!set.trajectories.empty()) d = set.trajectories.front().final_estimate().size();
  out << "replication,step," << point_header << ",y";
  for (std::size_t k = 1; k <= d; ++k) out << ",theta_hat_" << k;
  out << ",det_cum_info";
  if (with_timing) out << ",step_ms";
  out << '\n';
  for (std::size_t r = 0; r < set.trajectories.size(); ++r) {
    for (const auto& rec : set.trajectories[r].records) {
      out << set.replication_ids[r] << ',' << rec.index << ',';
      write_point(out, rec.x);
      out << ',' << format_double(rec.y);
      for (std::size_t k = 0; k < d; ++k) {
        out << ',';
        if (rec.theta_hat_after.size() > 0) out << format_double(rec.theta_hat_after[k]);
      }
      out << ',';
      if (!std::isnan(rec.det_cum_info)) out << format_double(rec.det_cum_info);
      if (with_timing) out << ',' << format_double(rec.step_ms);
      out << '\n';
    }
  }
}

template <class P>
void write_common(const std::filesystem::path& dir, const ReplicationSummary& s,
                  const ReplicationSet<P>& set) {
  {
    auto out = open_output(dir / "trajectories.csv");
    write_trajectories_csv(out, set, s.config.record_timing);
  }
  if (s.completed > 0) {
    auto out = open_output(dir / "efficiency.csv");
    write_curve_csv(out, s.mean_efficiency);
  }
  write_json(dir / "summary.json", summary_json(s));
  if (s.config.record_timing) write_json(dir / "timing.json", timing_json(set));
}

}  // namespace

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  for (const auto& [key, value] : doc.items()) {
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError(key + ": unknown field");
    }
  }
  if (!doc.contains("model")) throw ConfigError("model: required");

  RunConfig c;
  c.model = parse_model_kind(field<std::string>(doc, "model"));
  const bool glm = c.model == ModelKind::GlmC1 || c.model == ModelKind::GlmC2;
  if (glm) {
    c.n1 = 80;
    c.n = 800;
    c.initial_design = InitialDesign::FourPointGLM;
  }
  if (doc.contains("method")) c.method = parse_method(field<std::string>(doc, "method"));
  if (doc.contains("n1")) c.n1 = count_field(doc, "n1");
  if (doc.contains("n")) c.n = count_field(doc, "n");
  if (doc.contains("initial_design")) {
    c.initial_design = parse_initial_design(field<std::string>(doc, "initial_design"));
  }
  if (doc.contains("true_params")) c.true_params = ParamVector(field<std::vector<double>>(doc, "true_params"));
  if (doc.contains("sigma2")) c.sigma2 = field<double>(doc, "sigma2");
  if (doc.contains("x0_known")) c.x0_known = field<double>(doc, "x0_known");
  if (doc.contains("x_min")) c.omega.x_min = field<double>(doc, "x_min");
  if (doc.contains("x_max")) c.omega.x_max = field<double>(doc, "x_max");
  if (doc.contains("seed")) c.seed = field<std::uint64_t>(doc, "seed");
  if (doc.contains("replications")) c.replications = count_field(doc, "replications");
  if (doc.contains("delta_stop") && !doc.at("delta_stop").is_null()) {
    c.delta_stop = field<double>(doc, "delta_stop");
  }
  if (doc.contains("cm_grid")) c.cm_grid = count_field(doc, "cm_grid");
  if (doc.contains("threads")) c.threads = count_field(doc, "threads");
  if (doc.contains("record_timing")) c.record_timing = field<bool>(doc, "record_timing");
  if (c.true_params && c.true_params->size() == 0) throw ConfigError("true_params: empty");
  validate(c);
  return c;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json config_to_json(const RunConfig& c) {
  json doc;
  doc["model"] = std::string(to_string(c.model));
  doc["method"] = std::string(to_string(c.method));
  doc["n1"] = c.n1;
  doc["n"] = c.n;
  doc["initial_design"] = std::string(to_string(c.initial_design));
  doc["true_params"] = c.model_spec().truth.to_vector();
  if (c.model != ModelKind::GlmC1 && c.model != ModelKind::GlmC2) {
    doc["sigma2"] = c.sigma2;
    doc["x_min"] = c.omega.x_min;
    doc["x_max"] = c.omega.x_max;
    if (c.model == ModelKind::M2) doc["x0_known"] = c.x0_known;
  }
  doc["seed"] = c.seed;
  doc["replications"] = c.replications;
  doc["delta_stop"] = c.delta_stop ? json(*c.delta_stop) : json(nullptr);
  doc["cm_grid"] = c.cm_grid;
  return doc;
}

ReplicationSet<double> run_replications_nlr(const RunConfig& config) {
  return run_pool<double>(config, [](const RunConfig& c, std::uint64_t seed) { return run_nlr(c, seed); });
}

ReplicationSet<LevelPoint> run_replications_glm(const RunConfig& config) {
  return run_pool<LevelPoint>(config,
                              [](const RunConfig& c, std::uint64_t seed) { return run_glm(c, seed); });
}

ReplicationSummary summarize(const RunConfig& config, const ReplicationSet<double>& set) {
  ReplicationSummary s;
  s.config = config;
  fill_common(s, set, config.model_spec());
  if (!set.trajectories.empty()) s.density = sequential_density(set.trajectories, config.omega);
  return s;
}

ReplicationSummary summarize(const RunConfig& config, const ReplicationSet<LevelPoint>& set) {
  ReplicationSummary s;
  s.config = config;
  fill_common(s, set, config.model_spec());
  if (!set.trajectories.empty()) s.allocation = allocation_proportions(set.trajectories);
  return s;
}

void write_trajectories_csv(std::ostream& out, const ReplicationSet<double>& set, bool with_timing) {
  write_trajectories(out, set, with_timing, "x");
}

void write_trajectories_csv(std::ostream& out, const ReplicationSet<LevelPoint>& set, bool with_timing) {
  write_trajectories(out, set, with_timing, "x1,x2");
}

ReplicationSummary run_experiment(const RunConfig& config,
                                  const std::optional<std::filesystem::path>& out_dir) {
  validate(config);
  if (out_dir) std::filesystem::create_directories(*out_dir);
  if (config.model_spec().is_glm()) {
    const auto set = run_replications_glm(config);
    ReplicationSummary s = summarize(config, set);
    if (out_dir) {
      write_common(*out_dir, s, set);
      if (s.allocation) {
        auto out = open_output(*out_dir / "allocation.csv");
        out << "x1,x2,proportion\n";
        for (const auto& p : kLevelPoints)
          out << p.x1 << ',' << p.x2 << ',' << format_double((*s.allocation)[p.index()]) << '\n';
      }
    }
    return s;
  }
  const auto set = run_replications_nlr(config);
  ReplicationSummary s = summarize(config, set);
  if (out_dir) {
    write_common(*out_dir, s, set);
    if (s.density) {
      auto out = open_output(*out_dir / "density.csv");
      write_histogram_csv(out, *s.density);
    }
  }
  return s;
}

bool same_except_method(const RunConfig& a, const RunConfig& b) {
  RunConfig x = a;
  x.method = b.method;
  return config_to_json(x) == config_to_json(b);
}

ComparisonReport compare_summaries(std::span<const ReplicationSummary> summaries, double target) {
  if (summaries.size() < 2) throw ConfigMismatch("compare: need at least two configurations");
  ComparisonReport report;
  report.target = target;
  for (const auto& s : summaries) {
    if (!same_except_method(summaries.front().config, s.config)) {
      throw ConfigMismatch("compare: configurations differ in more than the method");
    }
    MethodComparison row;
    row.method = s.config.method;
    row.median_total_ms = s.median_total_ms;
    row.crossing = crossing_step(s.mean_efficiency, target);
    row.final_efficiency = s.mean_final_efficiency;
    report.rows.push_back(row);
  }
  return report;
}

ComparisonReport compare_methods(std::span<const RunConfig> configs, double target,
                                 const std::optional<std::filesystem::path>& out_dir) {
  if (configs.size() < 2) throw ConfigMismatch("compare: need at least two configurations");
  for (const auto& c : configs) {
    if (!same_except_method(configs.front(), c)) {
      throw ConfigMismatch("compare: configurations differ in more than the method");
    }
  }
  std::vector<ReplicationSummary> summaries;
  for (const auto& c : configs) {
    std::optional<std::filesystem::path> dir;
    if (out_dir) dir = *out_dir / std::string(to_string(c.method));
    summaries.push_back(run_experiment(c, dir));
  }
  ComparisonReport report = compare_summaries(summaries, target);
  if (out_dir) write_json(*out_dir / "comparison.json", comparison_to_json(report));
  return report;
}

json comparison_to_json(const ComparisonReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"method", std::string(to_string(r.method))},
                    {"median_total_ms", r.median_total_ms},
                    {"crossing", r.crossing ? json(*r.crossing) : json(nullptr)},
                    {"final_efficiency", r.final_efficiency}});
  }
  return {{"target", report.target}, {"methods", rows}};
}

double OracleReport::max_support_gap() const {
  double gap = 0.0;
  for (std::size_t k = 0; k < std::min(closed_support.size(), oracle_support.size()); ++k)
    gap = std::max(gap, std::abs(closed_support[k] - oracle_support[k]));
  return gap;
}

double OracleReport::max_weight_gap() const {
  double gap = 0.0;
  for (std::size_t k = 0; k < std::min(closed_weights.size(), oracle_weights.size()); ++k)
    gap = std::max(gap, std::abs(closed_weights[k] - oracle_weights[k]));
  return gap;
}

OracleReport oracle_check(const ModelSpec& model) {
  OracleReport report;
  report.model = model.kind;
  if (model.is_glm()) {
    const GlmParams beta = GlmParams::from_vector(model.truth);
    const GlmDesign xi = model.kind == ModelKind::GlmC1 ? mandal_c1(beta) : mandal_c2(beta);
    report.closed_weights.assign(4, 0.0);
    for (std::size_t k = 0; k < xi.size(); ++k) report.closed_weights[xi.support()[k].index()] = xi.weights()[k];
    report.closed_criterion = d_criterion_glm(xi, beta);
    const GlmOracleResult grid = grid_oracle_glm(beta, 0.001);
    report.oracle_weights.assign(grid.proportions.begin(), grid.proportions.end());
    report.oracle_criterion = grid.criterion;
    return report;
  }
  const NlrKind kind = model.nlr_kind();
  const auto fisher = [&](double x) { return fisher_info_nlr(kind, model.truth, x, model.noise()); };
  const NlrDesign xi = optimal_design_nlr(kind, model.truth, model.omega);
  report.closed_support = xi.support();
  report.closed_weights = xi.weights();
  report.closed_criterion = d_criterion_nlr(xi, fisher);
  NlrOracleConfig cfg;
  cfg.support_size = xi.size();
  cfg.coarse_step = xi.size() == 3 ? 0.25 : 0.05;
  cfg.refine_step = 0.01;
  const NlrOracleResult grid = grid_oracle_nlr(fisher, model.omega, cfg);
  report.oracle_support = grid.support;
  report.oracle_weights.assign(grid.support.size(), 1.0 / static_cast<double>(grid.support.size()));
  report.oracle_criterion = grid.criterion;
  return report;
}

json oracle_to_json(const OracleReport& r) {
  json doc;
  doc["model"] = std::string(to_string(r.model));
  if (!r.closed_support.empty()) {
    doc["closed_support"] = r.closed_support;
    doc["oracle_support"] = r.oracle_support;
    doc["max_support_gap"] = r.max_support_gap();
  }
  doc["closed_weights"] = r.closed_weights;
  doc["oracle_weights"] = r.oracle_weights;
  doc["max_weight_gap"] = r.max_weight_gap();
  doc["closed_criterion"] = r.closed_criterion;
  doc["oracle_criterion"] = r.oracle_criterion;
  doc["criterion_excess"] = r.criterion_excess();
  return doc;
}

std::string design_json(const ModelSpec& model, const ParamVector& theta) {
  if (model.is_glm()) {
    const GlmParams beta = GlmParams::from_vector(theta);
    return design_to_json(model.kind == ModelKind::GlmC1 ? mandal_c1(beta) : mandal_c2(beta));
  }
  return design_to_json(optimal_design_nlr(model.nlr_kind(), theta, model.omega));
}

}  // namespace pics
