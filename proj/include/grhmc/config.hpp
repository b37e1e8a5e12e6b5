#pragma once

#include "grhmc/ode.hpp"
#include "grhmc/process.hpp"
#include "grhmc/targets.hpp"
#include "grhmc/tuning.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace YAML {
class Node;
}

namespace grhmc {

struct DatasetSpec {
  std::filesystem::path path;
  std::string response;
  bool standardize = true;
  double prior_variance = 100.0;
};

/// Built-in target selection. `kind` is one of gaussian, standard_normal,
/// student_t, smiley, bimodal, funnel, logistic.
struct TargetSpec {
  std::string kind;
  Vector mean;
  Matrix covariance;
  int dim = 0;
  double nu = 4.0;
  double omega = 1.0;
  std::optional<DatasetSpec> dataset;
};

TargetModel build_target(const TargetSpec& spec);
/// Column labels used in sample files: q1..qd, or design column names.
std::vector<std::string> coordinate_names(const TargetSpec& spec, const TargetModel& model);

enum class Preset { kDesk, kPaper };
Preset parse_preset(const std::string& text);

struct ExperimentConfig {
  std::string name = "experiment";
  TargetSpec target;
  Method method = Method::kVari;
  int replicas = 10;
  double t_sample = 100000.0;
  long samples = 50000;  // N; sample spacing is t_sample / N
  double t_burn_scale = 6000.0;
  double t_burn_lambda = 5000.0;
  double lambda_initial = 0.2;
  MctSchedule mct;
  ode::IntegratorConfig integrator;
  std::uint64_t seed = 1;
  std::filesystem::path output = "out";
  bool write_samples = true;

  double sample_spacing() const { return t_sample / static_cast<double>(samples); }
  ProcessConfig process_config(int replica) const;
  void apply(Preset preset);
  void validate() const;
};

/// Parse an experiment; relative dataset paths resolve against `base_dir`.
ExperimentConfig parse_experiment(const YAML::Node& node, const std::filesystem::path& base_dir,
                                  ExperimentConfig defaults = {});
ExperimentConfig load_experiment(const std::filesystem::path& file);

struct SuiteConfig {
  std::string name = "suite";
  std::vector<ExperimentConfig> experiments;  // one per (target, method)
  std::vector<std::string> target_order;      // experiment names in file order
};

/**
 * A suite file has optional `name`, `methods` (default VARI, ISG, MCT),
 * `defaults` (any experiment keys) and a list `targets` of experiments
 * without a method; every target is run with every method.
 */
SuiteConfig load_suite(const std::filesystem::path& file);

}  // namespace grhmc
