#include "grhmc/config.hpp"
#include "grhmc/experiment.hpp"
#include "grhmc/report.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

using namespace grhmc;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = GRHMC_SOURCE_DIR;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("grhmc_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const fs::path& path, const std::string& body) {
  std::ofstream(path) << body;
  return path;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config(Method method = Method::kIsg) {
  ExperimentConfig c;
  c.name = "G1";
  c.target.kind = "gaussian";
  c.target.mean = Vector(2);
  c.target.mean << 1, 2;
  c.target.covariance = Matrix(2, 2);
  c.target.covariance << 4, 0.5, 0.5, 9;
  c.method = method;
  c.replicas = 2;
  c.t_sample = 1000.0;
  c.samples = 500;
  c.t_burn_scale = 300.0;
  c.t_burn_lambda = 50.0;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("default experiment size") {
  ExperimentConfig c;
  CHECK(c.replicas * c.samples == 500000);
  CHECK(c.sample_spacing() == 2.0);
  CHECK(c.process_config(3).seed == 4);
  CHECK(c.process_config(0).sample_count() == 50000);
  CHECK(c.t_burn_scale + c.t_burn_lambda == 11000.0);
}

TEST_CASE("presets") {
  ExperimentConfig c;
  c.apply(Preset::kDesk);
  CHECK(c.replicas == 4);
  CHECK(c.t_sample == 10000.0);
  CHECK(c.t_burn_scale == 3000.0);
  CHECK(c.t_burn_lambda == 0.0);
  c.apply(Preset::kPaper);
  CHECK(c.replicas == 10);
  CHECK(c.t_burn_lambda == 5000.0);
  CHECK_THROWS(parse_preset("huge"));
}

TEST_CASE("experiment file") {
  const fs::path dir = scratch("config");
  const fs::path file = write_file(dir / "e.yaml", R"(
name: demo
target:
  kind: funnel
  omega: 1.5
method: mct
preset: desk
replicas: 3
integrator: {abs_tol: 1.0e-7, rel_tol: 1.0e-8}
burnin:
  t_burn_lambda: 100
  mct:
    stage2: {shrinkage: 30}
)");
  const ExperimentConfig c = load_experiment(file);
  CHECK(c.name == "demo");
  CHECK(c.method == Method::kMct);
  CHECK(c.replicas == 3);
  CHECK(c.t_sample == 10000.0);
  CHECK(c.t_burn_scale == 3000.0);
  CHECK(c.t_burn_lambda == 100.0);
  CHECK(c.mct.stage2.shrinkage == 30.0);
  CHECK(c.mct.stage2.anchor_scale == 1.1);
  CHECK(c.integrator.abs_tol == 1e-7);
  CHECK(c.integrator.rel_tol == 1e-8);
  CHECK(build_target(c.target).dim() == 2);

  write_file(dir / "bad.yaml", "target: {kind: gaussian, mean: [0, 0], covariance: [[1, 2], [2, 1]]}\n");
  CHECK_THROWS(build_target(load_experiment(dir / "bad.yaml").target));
  write_file(dir / "zero.yaml", "target: {kind: smiley}\nreplicas: 0\n");
  CHECK_THROWS(load_experiment(dir / "zero.yaml").validate());
}

TEST_CASE("bundled suite") {
  const SuiteConfig suite = load_suite(kRoot / "configs" / "suite.yaml");
  CHECK(suite.experiments.size() == 33);
  REQUIRE(suite.target_order.size() == 11);
  CHECK(suite.target_order.front() == "G1");
  CHECK(suite.target_order.back() == "BLR2");
  for (const auto& e : suite.experiments) {
    CHECK(e.replicas == 10);
    CHECK(e.samples == 50000);
    const TargetModel t = build_target(e.target);
    if (e.name == "G4") CHECK(t.dim() == 10);
    if (e.name == "BLR1") CHECK(t.dim() == 8);
    if (e.name == "BLR2") CHECK(t.dim() == 25);
  }
}

TEST_CASE("small experiment pools every replica") {
  const ExperimentResult r = run_experiment(small_config(), {1, false, nullptr});
  CHECK(r.failures() == 0);
  REQUIRE(r.report);
  CHECK(r.report->total_samples == 1000);
  CHECK(r.replicas[1].seed == 6);
  std::uint64_t n_ode = 0;
  for (const auto& rep : r.replicas) n_ode += rep.chain->n_ode;
  CHECK(r.report->n_ode_total == n_ode);
  CHECK(r.coordinate_names == std::vector<std::string>{"q1", "q2"});
}

TEST_CASE("tables are identical across runs and thread counts") {
  const ExperimentConfig c = small_config(Method::kMct);
  const ExperimentResult a = run_experiment(c, {1, false, nullptr});
  const ExperimentResult b = run_experiment(c, {2, false, nullptr});
  const ExperimentResult again = run_experiment(c, {1, false, nullptr});
  CHECK(experiment_table_csv(a) == experiment_table_csv(b));
  CHECK(experiment_table_text(a) == experiment_table_text(again));
  CHECK(a.replicas[0].mct_stages.size() == 2);
}

TEST_CASE("replica failures are isolated") {
  const TargetModel bad("bad", 1, [](const Vector& q, Eigen::Ref<Vector> g) {
    g[0] = q[0] * q[0] * q[0];
    return 0.25 * q[0] * q[0] * q[0] * q[0];
  });
  ExperimentConfig c = small_config(Method::kVari);
  const ReplicaResult r = run_replica(c, bad, 1);
  CHECK_FALSE(r.chain);
  CHECK(r.index == 1);
  CHECK_FALSE(r.error.empty());
  CHECK(r.error_position.size() == 1);
}

TEST_CASE("outputs on disk") {
  const fs::path dir = scratch("outputs");
  ExperimentConfig c = small_config();
  c.output = dir;
  const ExperimentResult r = run_experiment(c, {1, true, nullptr});
  for (const char* f : {"replica_00.csv", "replica_01.csv", "replica_00.json", "table.csv", "table.txt"})
    CHECK(fs::exists(dir / f));

  const auto [names, samples] = read_samples_csv(dir / "replica_01.csv");
  CHECK(names == r.coordinate_names);
  CHECK(samples == r.replicas[1].chain->samples);

  const auto meta = nlohmann::json::parse(read_file(dir / "replica_00.json"));
  CHECK(meta["seed"].get<std::uint64_t>() == 5);
  CHECK(meta["n_ode"].get<std::uint64_t>() == r.replicas[0].chain->n_ode);
  CHECK(meta["S"].size() == 2);
  CHECK(meta["phases"].size() == 3);
  CHECK(read_file(dir / "table.csv") == experiment_table_csv(r));
}

TEST_CASE("comparison table layout") {
  const fs::path dir = scratch("suite");
  const fs::path file = write_file(dir / "suite.yaml", R"(
name: mini
defaults:
  replicas: 2
  t_sample: 400
  samples: 200
  burnin: {t_burn_scale: 120, t_burn_lambda: 0}
  write_samples: false
targets:
  - name: G3
    target: {kind: gaussian, mean: [0, 0], covariance: [[1, 0.95], [0.95, 1]]}
  - name: BLR1
    target:
      kind: logistic
      dataset: {path: )" + (kRoot / "data" / "pima.csv").string() + R"(, response: diabetes}
)");
  const SuiteConfig suite = load_suite(file);
  REQUIRE(suite.experiments.size() == 6);
  const auto results = run_suite(suite, dir / "out", {1, true, nullptr});
  REQUIRE(results.size() == 6);
  const std::string csv = read_file(dir / "out" / "comparison.csv");
  std::istringstream lines(csv);
  std::string header, row;
  std::getline(lines, header);
  CHECK(header.find("ESS VARI") != std::string::npos);
  CHECK(header.find("ESS*100000/N_ode MCT") != std::string::npos);
  std::vector<std::string> rows;
  while (std::getline(lines, row))
    if (!row.empty()) rows.push_back(row);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].rfind("G3,1,", 0) == 0);
  CHECK(rows[1].rfind(",2,", 0) == 0);
  CHECK(rows[2].rfind("BLR1,\"max ESS\",", 0) == 0);
  CHECK(rows[3].rfind(",\"min ESS\",", 0) == 0);
  CHECK(fs::exists(dir / "out" / "G3" / "ISG" / "table.txt"));
}
