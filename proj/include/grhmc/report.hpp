#pragma once

#include "grhmc/experiment.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace grhmc {

void write_samples_csv(const std::filesystem::path& file,
                       const std::vector<std::string>& names, const Matrix& samples);
/// Returns (header, samples).
std::pair<std::vector<std::string>, Matrix> read_samples_csv(const std::filesystem::path& file);

/// Per-replica metadata as a JSON document.
std::string replica_metadata_json(const ExperimentResult& result, const ReplicaResult& replica);

/// One row per reported coordinate.
std::string experiment_table_csv(const ExperimentResult& result);
std::string experiment_table_text(const ExperimentResult& result);

/// Side-by-side comparison of methods, one block of rows per target.
std::string comparison_table_csv(const std::vector<const ExperimentResult*>& results,
                                 const std::vector<std::string>& target_order);
std::string comparison_table_text(const std::vector<const ExperimentResult*>& results,
                                  const std::vector<std::string>& target_order);

/**
 * Writes replica_<i>.csv (when enabled), replica_<i>.json, table.csv and
 * table.txt into `dir`.
 */
void write_experiment(const ExperimentResult& result, const std::filesystem::path& dir);
/// Writes comparison.csv and comparison.txt into `dir`.
void write_suite_tables(const SuiteConfig& suite, const std::vector<ExperimentResult>& results,
                        const std::filesystem::path& dir);

}  // namespace grhmc
