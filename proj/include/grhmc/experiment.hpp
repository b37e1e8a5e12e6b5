#pragma once

#include "grhmc/config.hpp"
#include "grhmc/diagnostics.hpp"
#include "grhmc/process.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace grhmc {

struct ReplicaResult {
  int index = 0;
  std::uint64_t seed = 0;
  std::optional<ChainOutput> chain;  // empty when the replica failed
  std::vector<MctStageReport> mct_stages;
  std::string error;
  double error_time = 0.0;
  Vector error_position;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<std::string> coordinate_names;
  std::vector<ReplicaResult> replicas;  // in replica order
  std::optional<EssReport> report;      // over the successful replicas

  int failures() const;
};

struct RunOptions {
  int jobs = 0;               // worker threads; 0 means hardware concurrency
  bool write_outputs = true;  // samples, metadata and tables under config.output
  std::ostream* log = nullptr;
};

/// One chain: burn-in with the configured tuner, then sampling.
ReplicaResult run_replica(const ExperimentConfig& config, const TargetModel& target, int replica);

/**
 * Run every replica (in parallel when jobs > 1), summarize the successful
 * ones and optionally write outputs. Replica failures are recorded, not thrown.
 */
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Runs experiments one after another; outputs go to `root/<name>/<method>`.
/// A failing experiment is recorded and the suite continues.
std::vector<ExperimentResult> run_suite(const SuiteConfig& suite,
                                        const std::filesystem::path& root,
                                        const RunOptions& options = {});

}  // namespace grhmc
