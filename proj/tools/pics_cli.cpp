// Command-line front end: run, compare, design, oracle.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pics/errors.hpp"
#include "pics/harness.hpp"

namespace {

using nlohmann::json;

// Flags mirroring RunConfig; only the ones given on the command line
// override the config file.
struct ConfigFlags {
  std::string config_file;
  std::string model, method, initial_design;
  std::vector<double> true_params;
  double sigma2 = 0, x0_known = 0, x_min = 0, x_max = 0, delta_stop = 0;
  std::size_t n1 = 0, n = 0, reps = 0, cm_grid = 0, threads = 0;
  std::uint64_t seed = 0;
  bool timing = false;
  std::vector<std::pair<CLI::Option*, std::string>> options;

  template <class T>
  void add(CLI::App* app, const std::string& flag, T& target, const std::string& key, const std::string& help) {
    options.emplace_back(app->add_option(flag, target, help), key);
  }

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "JSON config file")->check(CLI::ExistingFile);
    add(app, "--model", model, "model", "M1, M2, M3, GLM_C1 or GLM_C2");
    add(app, "--method", method, "method", "CM, PICS or BalancedPICS");
    add(app, "--n1", n1, "n1", "static-stage size");
    add(app, "--n", n, "n", "final design size");
    add(app, "--initial-design", initial_design, "initial_design", "uniform, three-point or four-point");
    options.emplace_back(
        app->add_option("--true-params", true_params, "true parameters, comma separated")->delimiter(','),
        "true_params");
    add(app, "--sigma2", sigma2, "sigma2", "noise variance (growth models)");
    add(app, "--x0-known", x0_known, "x0_known", "change point of M2");
    add(app, "--x-min", x_min, "x_min", "lower end of the experiment interval");
    add(app, "--x-max", x_max, "x_max", "upper end of the experiment interval");
    add(app, "--seed", seed, "seed", "base seed; replication r uses seed + r");
    add(app, "--reps", reps, "replications", "number of replications");
    add(app, "--delta-stop", delta_stop, "delta_stop", "relative determinant-change stopping threshold");
    add(app, "--cm-grid", cm_grid, "cm_grid", "grid size of the CM criterion search");
    add(app, "--threads", threads, "threads", "worker threads (0: all cores)");
    options.emplace_back(app->add_flag("--timing", timing, "record per-step timings"), "record_timing");
  }

  [[nodiscard]] json merged() const {
    json doc = json::object();
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      try {
        doc = json::parse(in);
      } catch (const json::parse_error& e) {
        throw pics::ConfigError("config: " + config_file + ": " + e.what());
      }
    }
    for (const auto& [opt, key] : options) {
      if (opt->count() == 0) continue;
      doc[key] = value_of(key);
    }
    return doc;
  }

  [[nodiscard]] json value_of(const std::string& key) const {
    if (key == "model") return model;
    if (key == "method") return method;
    if (key == "initial_design") return initial_design;
    if (key == "true_params") return true_params;
    if (key == "sigma2") return sigma2;
    if (key == "x0_known") return x0_known;
    if (key == "x_min") return x_min;
    if (key == "x_max") return x_max;
    if (key == "delta_stop") return delta_stop;
    if (key == "n1") return n1;
    if (key == "n") return n;
    if (key == "replications") return reps;
    if (key == "cm_grid") return cm_grid;
    if (key == "threads") return threads;
    if (key == "seed") return seed;
    return timing;
  }
};

struct ModelFlags {
  std::string model = "M1";
  std::vector<double> theta;
  double x0_known = 86.67, x_min = 0.5, x_max = 210.0;

  void attach(CLI::App* app) {
    app->add_option("--model", model, "M1, M2, M3, GLM_C1 or GLM_C2");
    app->add_option("--theta", theta, "parameters, comma separated (default: true values)")->delimiter(',');
    app->add_option("--x0-known", x0_known, "change point of M2");
    app->add_option("--x-min", x_min, "lower end of the experiment interval");
    app->add_option("--x-max", x_max, "upper end of the experiment interval");
  }

  [[nodiscard]] pics::ModelSpec spec() const {
    pics::ModelSpec s = pics::ModelSpec::defaults(pics::parse_model_kind(model));
    s.x0_known = x0_known;
    s.omega = {x_min, x_max};
    if (!theta.empty()) s.truth = pics::ParamVector(theta);
    if (s.truth.size() != s.dim()) throw pics::ConfigError("theta: wrong number of parameters");
    return s;
  }
};

void print_summary(const pics::ReplicationSummary& s) {
  std::printf("%s %s: %zu replications, %zu failed, mean e_%zu = %.4f (midpoint %.4f)\n",
              std::string(pics::to_string(s.config.model)).c_str(),
              std::string(pics::to_string(s.config.method)).c_str(), s.completed, s.failures.size(),
              s.completed ? s.mean_efficiency.last_step() : 0, s.mean_final_efficiency,
              s.mean_midpoint_efficiency);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential locally D-optimal designs: criterion maximization versus closed-form plug-in"};
  app.require_subcommand(1);

  ConfigFlags run_flags;
  std::string run_out;
  auto* run = app.add_subcommand("run", "run replications of one configuration");
  run_flags.attach(run);
  run->add_option("--out-dir", run_out, "output directory")->required();
  run->get_option("--seed")->required();
  run->get_option("--reps")->required();

  ConfigFlags cmp_flags;
  std::string cmp_out;
  std::vector<std::string> cmp_methods{"CM", "PICS"};
  double cmp_target = 0.6;
  auto* compare = app.add_subcommand("compare", "run several methods on one configuration");
  cmp_flags.attach(compare);
  compare->add_option("--methods", cmp_methods, "methods to compare")->delimiter(',');
  compare->add_option("--target", cmp_target, "efficiency crossing target");
  compare->add_option("--out-dir", cmp_out, "output directory (one subdirectory per method)");

  ModelFlags design_flags;
  auto* design = app.add_subcommand("design", "print the closed-form optimal design as JSON");
  design_flags.attach(design);

  ModelFlags oracle_flags;
  auto* oracle = app.add_subcommand("oracle", "compare the closed-form design with a grid search");
  oracle_flags.attach(oracle);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const pics::RunConfig config = pics::parse_config(run_flags.merged());
      print_summary(pics::run_experiment(config, std::filesystem::path(run_out)));
    } else if (*compare) {
      std::vector<pics::RunConfig> configs;
      for (const auto& m : cmp_methods) {
        json doc = cmp_flags.merged();
        doc["method"] = m;
        configs.push_back(pics::parse_config(doc));
      }
      std::optional<std::filesystem::path> dir;
      if (!cmp_out.empty()) dir = cmp_out;
      std::cout << pics::comparison_to_json(pics::compare_methods(configs, cmp_target, dir)).dump(2) << '\n';
    } else if (*design) {
      const pics::ModelSpec spec = design_flags.spec();
      std::cout << pics::design_json(spec, spec.truth) << '\n';
    } else if (*oracle) {
      std::cout << pics::oracle_to_json(pics::oracle_check(oracle_flags.spec())).dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
