#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "pics/errors.hpp"
#include "pics/harness.hpp"

using namespace pics;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pics_harness_" + name);
  fs::remove_all(p);
  return p;
}

std::string config_error(const nlohmann::json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

RunConfig small(ModelKind model, Method method, std::size_t reps) {
  RunConfig c;
  c.model = model;
  c.method = method;
  c.replications = reps;
  c.seed = 11;
  if (model == ModelKind::GlmC1 || model == ModelKind::GlmC2) {
    c.n1 = 80;
    c.n = 800;
    c.initial_design = InitialDesign::FourPointGLM;
  }
  return c;
}

}  // namespace

TEST_CASE("minimal config takes the defaults") {
  const RunConfig c = parse_config({{"model", "M1"}});
  const RunConfig d;
  CHECK(config_to_json(c) == config_to_json(d));
  CHECK(c.model_spec().truth == ParamVector{32.11, 105.65});
  CHECK(c.sigma2 == 0.086);
  CHECK(c.method == Method::PICS);

  const RunConfig m3 = parse_config({{"model", "M3"}});
  CHECK(m3.model_spec().truth == ParamVector{32.11, 105.65, 86.67});

  const RunConfig g = parse_config({{"model", "GLM_C1"}});
  CHECK(g.n1 == 80);
  CHECK(g.n == 800);
  CHECK(g.initial_design == InitialDesign::FourPointGLM);
  CHECK(g.model_spec().truth == ParamVector{0.7125, 0.7125, 0.7125});
  CHECK(parse_config({{"model", "GLM_C2"}}).model_spec().truth == ParamVector{1.5, 0.5, 0.0});
}

TEST_CASE("config validation names the field") {
  CHECK(config_error({{"model", "M1"}, {"n1", 100}, {"n", 100}}).rfind("n1", 0) == 0);
  CHECK(config_error({{"model", "GLM_C1"}, {"n1", 81}}).rfind("n1", 0) == 0);
  CHECK(config_error({{"model", "M4"}}).rfind("model", 0) == 0);
  CHECK(config_error({{"model", "M1"}, {"colour", 1}}).rfind("colour", 0) == 0);
  CHECK(config_error({{"model", "M1"}, {"initial_design", "four-point"}}).rfind("initial_design", 0) == 0);
  CHECK(config_error({{"model", "M1"}, {"sigma2", -1.0}}).rfind("sigma2", 0) == 0);
  CHECK(config_error({{"model", "M1"}, {"replications", 0}}).rfind("replications", 0) == 0);
  CHECK(config_error({{"model", "M1"}, {"n1", "forty"}}).rfind("n1", 0) == 0);
  CHECK(config_error({{"model", "M2"}, {"true_params", {1.0}}}).rfind("true_params", 0) == 0);
  CHECK(config_error({{"model", "GLM_C1"}, {"true_params", {0.9, 0.9, 0.9}}}).rfind("true_params", 0) == 0);
  CHECK(config_error({{"model", "GLM_C2"}, {"true_params", {1.0, -1.0, 0.0}}}).rfind("true_params", 0) == 0);
  CHECK(config_error({{"model", "GLM_C1"}, {"method", "BalancedPICS"}}).rfind("method", 0) == 0);
  CHECK(config_error({{"n1", 10}}).rfind("model", 0) == 0);
}

TEST_CASE("config file round trip") {
  const fs::path dir = scratch("config");
  fs::create_directories(dir);
  std::ofstream(dir / "c.json") << R"({"model": "M3", "method": "CM", "n1": 60, "n": 200, "seed": 5})";
  const RunConfig c = parse_config_file(dir / "c.json");
  CHECK(c.model == ModelKind::M3);
  CHECK(c.method == Method::CM);
  CHECK(c.seed == 5);
  CHECK(config_to_json(parse_config(config_to_json(c))) == config_to_json(c));
  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK_THROWS_AS(parse_config_file(dir / "bad.json"), ConfigError);
}

TEST_CASE("single replication summary equals the trajectory metrics") {
  RunConfig c = small(ModelKind::M1, Method::PICS, 1);
  const ReplicationSummary s = run_experiment(c);
  const auto t = run_nlr(c, c.seed);
  const ModelSpec spec = c.model_spec();
  const EfficiencyCurve e = relative_efficiency(t, true_fisher_info(spec), spec);
  CHECK(s.completed == 1);
  CHECK(s.mean_efficiency.e == e.e);
  CHECK(s.mean_final_efficiency == e.e.back());
  CHECK(s.estimate_mean == t.final_estimate());
  CHECK(s.density);
  CHECK_FALSE(s.allocation);
}

TEST_CASE("outputs are byte-identical across reruns and thread counts") {
  for (ModelKind model : {ModelKind::M2, ModelKind::GlmC2}) {
    RunConfig c = small(model, Method::PICS, 4);
    c.n = model == ModelKind::M2 ? 80 : 200;
    c.threads = 1;
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    run_experiment(c, a);
    c.threads = 4;
    run_experiment(c, b);
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
      CAPTURE(entry.path().filename().string());
      CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
      ++files;
    }
    CHECK(files == 4);
    CHECK(fs::exists(a / (model == ModelKind::M2 ? "density.csv" : "allocation.csv")));
    CHECK_FALSE(fs::exists(a / "timing.json"));
  }
}

TEST_CASE("timing output is opt-in") {
  RunConfig c = small(ModelKind::M1, Method::CM, 2);
  c.record_timing = true;
  const fs::path dir = scratch("timing");
  run_experiment(c, dir);
  CHECK(fs::exists(dir / "timing.json"));
  const std::string traj = slurp(dir / "trajectories.csv");
  CHECK(traj.substr(0, traj.find('\n')) ==
        "replication,step,x,y,theta_hat_1,theta_hat_2,det_cum_info,step_ms");
}

TEST_CASE("comparison rejects configs that differ beyond the method") {
  RunConfig a = small(ModelKind::M1, Method::CM, 2);
  RunConfig b = small(ModelKind::M1, Method::PICS, 2);
  CHECK(same_except_method(a, b));
  b.n = 120;
  CHECK_FALSE(same_except_method(a, b));
  const std::vector<RunConfig> configs{a, b};
  CHECK_THROWS_AS(compare_methods(configs, 0.6), ConfigMismatch);
  const std::vector<RunConfig> one{a};
  CHECK_THROWS_AS(compare_methods(one, 0.6), ConfigMismatch);
}

TEST_CASE("PICS efficiency at n = 200 is at least that of CM") {
  RunConfig c = small(ModelKind::M2, Method::CM, 50);
  c.initial_design = InitialDesign::ThreePointNLR;
  c.n1 = 60;
  c.n = 200;
  const ReplicationSummary cm = run_experiment(c);
  c.method = Method::PICS;
  const ReplicationSummary pics = run_experiment(c);
  CAPTURE(cm.mean_final_efficiency);
  CAPTURE(pics.mean_final_efficiency);
  CHECK(pics.mean_final_efficiency >= cm.mean_final_efficiency);
}

TEST_CASE("crossing report on the change-point model") {
  RunConfig c = small(ModelKind::M2, Method::CM, 50);
  c.initial_design = InitialDesign::ThreePointNLR;
  c.n1 = 60;
  c.n = 200;
  RunConfig p = c;
  p.method = Method::PICS;
  const std::vector<RunConfig> configs{c, p};
  const ComparisonReport r = compare_methods(configs, 0.6);
  REQUIRE(r.rows.size() == 2);
  REQUIRE(r.rows[0].crossing);
  REQUIRE(r.rows[1].crossing);
  CAPTURE(*r.rows[0].crossing);
  CAPTURE(*r.rows[1].crossing);
  CHECK(*r.rows[1].crossing < *r.rows[0].crossing);
}

TEST_CASE("median times on the estimated change-point model") {
  RunConfig c = small(ModelKind::M3, Method::CM, 10);
  c.n1 = 60;
  c.n = 200;
  c.threads = 1;
  RunConfig p = c;
  p.method = Method::PICS;
  const std::vector<RunConfig> configs{c, p};
  const ComparisonReport r = compare_methods(configs, 0.6);
  CAPTURE(r.rows[0].median_total_ms);
  CAPTURE(r.rows[1].median_total_ms);
  CHECK(r.rows[1].median_total_ms < r.rows[0].median_total_ms);
}

TEST_CASE("median times on the factorial model") {
  RunConfig c = small(ModelKind::GlmC1, Method::CM, 10);
  c.threads = 1;
  RunConfig p = c;
  p.method = Method::PICS;
  const std::vector<RunConfig> configs{c, p};
  const ComparisonReport r = compare_methods(configs, 0.6);
  const double cm = r.rows[0].median_total_ms, pics = r.rows[1].median_total_ms;
  CAPTURE(cm);
  CAPTURE(pics);
  CHECK(pics <= cm);
  CHECK(pics > cm / 10.0);
}

TEST_CASE("oracle report") {
  const OracleReport r = oracle_check(ModelSpec::defaults(ModelKind::M1));
  CHECK(r.criterion_excess() <= 1e-3);
  CHECK(r.max_support_gap() < 0.1);
  const nlohmann::json j = nlohmann::json::parse(design_json(ModelSpec::defaults(ModelKind::M3), {32.11, 105.65, 86.67}));
  CHECK(j["support"].size() == 3);
}

TEST_CASE("command line run is deterministic") {
  const fs::path a = scratch("cli_a"), b = scratch("cli_b");
  const std::string base = std::string(PICS_CLI_PATH) + " run --model M1 --n1 40 --n 70 --seed 3 --reps 3 --out-dir ";
  REQUIRE(std::system((base + a.string() + " > /dev/null").c_str()) == 0);
  REQUIRE(std::system((base + b.string() + " > /dev/null").c_str()) == 0);
  for (const char* f : {"trajectories.csv", "efficiency.csv", "density.csv", "summary.json"})
    CHECK(slurp(a / f) == slurp(b / f));
  const std::string missing = std::string(PICS_CLI_PATH) + " run --model M1 --reps 1 --out-dir " +
                              a.string() + " > /dev/null 2>&1";
  CHECK(std::system(missing.c_str()) != 0);
}
