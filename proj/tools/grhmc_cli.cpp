#include "grhmc/config.hpp"
#include "grhmc/diagnostics.hpp"
#include "grhmc/experiment.hpp"
#include "grhmc/report.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace grhmc;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> replicas;
  std::optional<std::string> out;
  std::optional<std::string> preset;
  int jobs = 0;
  bool no_samples = false;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "base seed; replica i uses seed + i");
  cmd->add_option("--replicas", o.replicas, "number of independent replicas")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--preset", o.preset, "run scale: desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_option("--jobs", o.jobs, "worker threads (default: all cores)");
  cmd->add_flag("--no-samples", o.no_samples, "do not write per-replica sample files");
  cmd->add_flag("--quiet", o.quiet, "no progress output");
}

void apply(ExperimentConfig& cfg, const Overrides& o) {
  if (o.preset) cfg.apply(parse_preset(*o.preset));
  if (o.seed) cfg.seed = *o.seed;
  if (o.replicas) cfg.replicas = *o.replicas;
  if (o.out) cfg.output = *o.out;
  if (o.no_samples) cfg.write_samples = false;
  cfg.validate();
}

int run_command(const std::string& file, const Overrides& o) {
  ExperimentConfig cfg = load_experiment(file);
  apply(cfg, o);
  RunOptions opts;
  opts.jobs = o.jobs;
  opts.log = o.quiet ? nullptr : &std::cerr;
  const ExperimentResult result = run_experiment(cfg, opts);
  std::cout << experiment_table_text(result);
  std::cout << "outputs written to " << cfg.output.string() << "\n";
  return result.failures() == 0 ? 0 : 2;
}

int suite_command(const std::string& file, const Overrides& o) {
  SuiteConfig suite = load_suite(file);
  for (auto& cfg : suite.experiments) {
    Overrides per = o;
    per.out.reset();
    apply(cfg, per);
  }
  const fs::path root = o.out ? fs::path(*o.out) : fs::path("out") / suite.name;
  RunOptions opts;
  opts.jobs = o.jobs;
  opts.log = o.quiet ? nullptr : &std::cerr;
  const auto results = run_suite(suite, root, opts);
  std::vector<const ExperimentResult*> ptrs;
  int failures = 0;
  for (const auto& r : results) {
    ptrs.push_back(&r);
    failures += r.failures();
  }
  std::cout << comparison_table_text(ptrs, suite.target_order);
  std::cout << "outputs written to " << root.string() << "\n";
  return failures == 0 ? 0 : 2;
}

int ess_command(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("replica_", 0) == 0 && entry.path().extension() == ".csv")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no replica_*.csv files in " + dir);

  std::vector<ReplicaSummary> replicas;
  std::vector<std::string> names;
  bool have_meta = true;
  for (const auto& f : files) {
    auto [header, samples] = read_samples_csv(f);
    if (names.empty()) names = header;
    ReplicaSummary r;
    r.samples = std::move(samples);
    r.scale = Vector::Constant(r.samples.cols(), std::nan(""));
    fs::path meta = f;
    meta.replace_extension(".json");
    std::ifstream in(meta);
    if (in) {
      const auto j = nlohmann::json::parse(in);
      r.n_ode = j.value("n_ode", std::uint64_t{0});
      if (j.contains("S")) {
        const auto s = j["S"].get<std::vector<double>>();
        if (static_cast<Eigen::Index>(s.size()) == r.scale.size())
          r.scale = Eigen::Map<const Vector>(s.data(), static_cast<Eigen::Index>(s.size()));
      }
    } else {
      have_meta = false;
    }
    replicas.push_back(std::move(r));
  }
  const EssReport report = summarize(replicas);
  std::printf("%-16s %12s %12s %12s %12s\n", "coordinate", "ESS", "mean", "sd",
              have_meta ? "ESS*1e5/Node" : "");
  for (const auto& row : report.coordinates) {
    const auto j = static_cast<std::size_t>(row.coordinate);
    const std::string label = j < names.size() ? names[j] : row.label;
    std::printf("%-16s %12.0f %12.4f %12.4f", label.c_str(), row.ess.value, row.mean, row.sd);
    if (have_meta && report.n_ode_total > 0) std::printf(" %12.1f", row.efficiency);
    std::printf("%s\n", row.ess.undefined ? "  (constant)" : "");
  }
  std::printf("%zu chains, %ld samples", replicas.size(), report.total_samples);
  if (have_meta) std::printf(", N_ode total %llu", static_cast<unsigned long long>(report.n_ode_total));
  std::printf("\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-time GRHMC sampling with adaptive diagonal scaling"};
  app.require_subcommand(1);
  Overrides run_o, suite_o;
  std::string run_file, suite_file, ess_dir;

  auto* run = app.add_subcommand("run", "run one experiment from a config file");
  run->add_option("config", run_file, "experiment config (YAML)")->required()->check(CLI::ExistingFile);
  add_common(run, run_o);

  auto* suite = app.add_subcommand("suite", "run every target with every method");
  suite->add_option("suite", suite_file, "suite file (YAML)")->required()->check(CLI::ExistingFile);
  add_common(suite, suite_o);

  auto* ess = app.add_subcommand("ess", "ESS of replica sample files in a directory");
  ess->add_option("samples-dir", ess_dir, "directory with replica_*.csv")
      ->required()
      ->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return run_command(run_file, run_o);
    if (*suite) return suite_command(suite_file, suite_o);
    if (*ess) return ess_command(ess_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
