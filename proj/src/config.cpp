#include "grhmc/config.hpp"

#include "grhmc/dataset.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <cmath>

namespace grhmc {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

Vector read_vector(const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence()) throw ModelError("'" + key + "' must be a list of numbers");
  Vector v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) v[static_cast<Eigen::Index>(i)] = node[i].as<double>();
  return v;
}

Matrix read_matrix(const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence() || node.size() == 0)
    throw ModelError("'" + key + "' must be a list of rows");
  const auto rows = static_cast<Eigen::Index>(node.size());
  const auto cols = static_cast<Eigen::Index>(node[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const YAML::Node row = node[static_cast<std::size_t>(i)];
    if (!row.IsSequence() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ModelError("'" + key + "' rows must have equal length");
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = row[static_cast<std::size_t>(j)].as<double>();
  }
  return m;
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out) {
  if (const YAML::Node v = node[key]) out = v.as<T>();
}

TargetSpec parse_target(const YAML::Node& node, const std::filesystem::path& base_dir) {
  if (!node.IsMap()) throw ModelError("'target' must be a mapping");
  TargetSpec spec;
  spec.kind = lower(node["kind"].as<std::string>(""));
  if (spec.kind.empty()) throw ModelError("target needs a 'kind'");
  if (const auto v = node["mean"]) spec.mean = read_vector(v, "mean");
  if (const auto v = node["covariance"]) spec.covariance = read_matrix(v, "covariance");
  read(node, "dim", spec.dim);
  read(node, "nu", spec.nu);
  read(node, "omega", spec.omega);
  if (const auto ds = node["dataset"]) {
    DatasetSpec d;
    d.path = ds["path"].as<std::string>("");
    if (d.path.empty()) throw ModelError("dataset needs a 'path'");
    if (d.path.is_relative()) d.path = base_dir / d.path;
    d.response = ds["response"].as<std::string>("");
    if (d.response.empty()) throw ModelError("dataset needs a 'response' column");
    read(ds, "standardize", d.standardize);
    read(ds, "prior_variance", d.prior_variance);
    spec.dataset = d;
  }
  return spec;
}

void parse_mct(const YAML::Node& node, MctSchedule& mct) {
  read(node, "stage_ratio", mct.stage_ratio);
  read(node, "warmup_fraction", mct.warmup_fraction);
  read(node, "grid_spacing", mct.grid_spacing);
  read(node, "target_time", mct.target_time);
  read(node, "lambda", mct.lambda);
  read(node, "exponent", mct.exponent);
  read(node, "offset", mct.offset);
  if (const auto s = node["stage1"]) {
    read(s, "shrinkage", mct.stage1.shrinkage);
    read(s, "anchor_scale", mct.stage1.anchor_scale);
  }
  if (const auto s = node["stage2"]) {
    read(s, "shrinkage", mct.stage2.shrinkage);
    read(s, "anchor_scale", mct.stage2.anchor_scale);
  }
}

}  // namespace

TargetModel build_target(const TargetSpec& spec) {
  const std::string& k = spec.kind;
  if (k == "gaussian") return make_gaussian({spec.mean, spec.covariance});
  if (k == "standard_normal") {
    if (spec.dim < 1) throw ModelError("standard_normal needs dim >= 1");
    return make_standard_normal(spec.dim);
  }
  if (k == "student_t") return make_student_t(spec.mean, spec.covariance, spec.nu);
  if (k == "smiley") return make_smiley();
  if (k == "bimodal") return make_bimodal();
  if (k == "funnel") return make_funnel(spec.omega);
  if (k == "logistic") {
    if (!spec.dataset) throw ModelError("logistic target needs a 'dataset' block");
    const DatasetSpec& d = *spec.dataset;
    return make_logistic(load_csv_dataset(d.path.string(), d.response, d.standardize,
                                          d.prior_variance));
  }
  throw ModelError("unknown target kind '" + k + "'");
}

std::vector<std::string> coordinate_names(const TargetSpec& spec, const TargetModel& model) {
  if (spec.dataset) {
    const DatasetSpec& d = *spec.dataset;
    auto data = load_csv_dataset(d.path.string(), d.response, d.standardize, d.prior_variance);
    if (static_cast<int>(data.column_names.size()) == model.dim()) return data.column_names;
  }
  std::vector<std::string> names;
  for (int j = 0; j < model.dim(); ++j) names.push_back("q" + std::to_string(j + 1));
  return names;
}

Preset parse_preset(const std::string& text) {
  const std::string s = lower(text);
  if (s == "desk") return Preset::kDesk;
  if (s == "paper") return Preset::kPaper;
  throw ModelError("unknown preset '" + text + "' (expected desk or paper)");
}

ProcessConfig ExperimentConfig::process_config(int replica) const {
  ProcessConfig pc;
  pc.lambda = lambda_initial;
  pc.sample_spacing = sample_spacing();
  pc.t_sample = t_sample;
  pc.t_burn_scale = t_burn_scale;
  pc.t_burn_lambda = t_burn_lambda;
  pc.seed = seed + static_cast<std::uint64_t>(replica);
  return pc;
}

void ExperimentConfig::apply(Preset preset) {
  if (preset == Preset::kDesk) {
    replicas = 4;
    t_sample = 10000.0;
    samples = 5000;
    t_burn_scale = 3000.0;
    t_burn_lambda = 0.0;
  } else {
    replicas = 10;
    t_sample = 100000.0;
    samples = 50000;
    t_burn_scale = 6000.0;
    t_burn_lambda = 5000.0;
  }
}

void ExperimentConfig::validate() const {
  if (replicas < 1) throw ModelError("replicas must be at least 1");
  if (samples < 1) throw ModelError("samples must be at least 1");
  if (!(t_sample > 0.0)) throw ModelError("t_sample must be positive");
  if (!(t_burn_scale >= 0.0) || !(t_burn_lambda >= 0.0))
    throw ModelError("burn-in durations must be nonnegative");
  if (!(lambda_initial >= 0.0)) throw ModelError("lambda_initial must be nonnegative");
  if (!(integrator.abs_tol > 0.0) || !(integrator.rel_tol > 0.0))
    throw ModelError("integrator tolerances must be positive");
  mct.validate();
  process_config(0).validate();
}

ExperimentConfig parse_experiment(const YAML::Node& node, const std::filesystem::path& base_dir,
                                  ExperimentConfig cfg) {
  if (!node.IsMap()) throw ModelError("experiment must be a mapping");
  read(node, "name", cfg.name);
  if (const auto t = node["target"]) cfg.target = parse_target(t, base_dir);
  if (const auto m = node["method"]) cfg.method = parse_method(m.as<std::string>());
  if (const auto p = node["preset"]) cfg.apply(parse_preset(p.as<std::string>()));
  read(node, "replicas", cfg.replicas);
  read(node, "t_sample", cfg.t_sample);
  read(node, "samples", cfg.samples);
  read(node, "lambda_initial", cfg.lambda_initial);
  read(node, "seed", cfg.seed);
  read(node, "write_samples", cfg.write_samples);
  if (const auto o = node["output"]) {
    cfg.output = o.as<std::string>();
    if (cfg.output.is_relative()) cfg.output = base_dir / cfg.output;
  }
  if (const auto b = node["burnin"]) {
    read(b, "t_burn_scale", cfg.t_burn_scale);
    read(b, "t_burn_lambda", cfg.t_burn_lambda);
    if (const auto m = b["mct"]) parse_mct(m, cfg.mct);
  }
  if (const auto i = node["integrator"]) {
    read(i, "abs_tol", cfg.integrator.abs_tol);
    read(i, "rel_tol", cfg.integrator.rel_tol);
    read(i, "max_step", cfg.integrator.max_step);
    if (const auto h = i["initial_step"]) cfg.integrator.initial_step = h.as<double>();
  }
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& file) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(file.string());
  } catch (const YAML::Exception& e) {
    throw ModelError("cannot read config " + file.string() + ": " + e.what());
  }
  ExperimentConfig cfg = parse_experiment(root, file.parent_path());
  if (cfg.target.kind.empty()) throw ModelError("config has no target");
  cfg.validate();
  return cfg;
}

SuiteConfig load_suite(const std::filesystem::path& file) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(file.string());
  } catch (const YAML::Exception& e) {
    throw ModelError("cannot read suite " + file.string() + ": " + e.what());
  }
  const auto base = file.parent_path();
  SuiteConfig suite;
  read(root, "name", suite.name);
  std::vector<Method> methods{Method::kVari, Method::kIsg, Method::kMct};
  if (const auto m = root["methods"]) {
    methods.clear();
    for (const auto& item : m) methods.push_back(parse_method(item.as<std::string>()));
  }
  ExperimentConfig defaults;
  if (const auto d = root["defaults"]) defaults = parse_experiment(d, base, defaults);
  const YAML::Node targets = root["targets"];
  if (!targets || !targets.IsSequence()) throw ModelError("suite needs a 'targets' list");
  for (const auto& t : targets) {
    ExperimentConfig base_cfg = parse_experiment(t, base, defaults);
    if (base_cfg.target.kind.empty())
      throw ModelError("suite entry '" + base_cfg.name + "' has no target");
    suite.target_order.push_back(base_cfg.name);
    for (Method m : methods) {
      ExperimentConfig cfg = base_cfg;
      cfg.method = m;
      cfg.validate();
      suite.experiments.push_back(std::move(cfg));
    }
  }
  return suite;
}

}  // namespace grhmc
