#pragma once

#include "grhmc/targets.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace grhmc {

struct EssEstimate {
  double value = 0.0;
  bool undefined = false;  // constant or non-finite draws; value is 0
};

/**
 * Bulk effective sample size of one scalar quantity: chains are split in
 * half, pooled draws are rank-normalized, and the autocorrelation sum is
 * truncated with Geyer's initial positive and monotone sequences.
 * `draws` is (iterations x chains).
 */
EssEstimate bulk_ess(const Matrix& draws);

/// Per-coordinate bulk ESS over replicas, each an (N x d) sample matrix of equal size.
std::vector<EssEstimate> ess(const std::vector<Matrix>& chains);

/// Unnormalized biased autocovariance (divisor N) at lags 0..N-1, via FFT.
Vector autocovariance(const Vector& x);

/// ESS per 100000 right-hand-side evaluations.
double efficiency(double ess_value, std::uint64_t n_ode_total);

struct ReplicaSummary {
  Matrix samples;  // N x d
  Vector scale;    // final S
  std::uint64_t n_ode = 0;
};

struct CoordinateRow {
  std::string label;  // "1", "2", ... or "max ESS" / "min ESS"
  int coordinate = 0;  // zero based
  EssEstimate ess;
  double mean = 0.0;        // pooled sample mean
  double sd = 0.0;          // pooled sample SD
  double mean_se = 0.0;     // sd / sqrt(ESS)
  double scale_mean = 0.0;  // mean of final S_j across replicas
  double scale_sd = 0.0;    // SD (n-1) of final S_j across replicas
  double efficiency = 0.0;
};

struct EssReport {
  std::vector<CoordinateRow> coordinates;  // every coordinate
  std::uint64_t n_ode_total = 0;
  long total_samples = 0;

  /// Rows to print: all coordinates up to `max_listed`, otherwise max and min ESS.
  std::vector<CoordinateRow> table_rows(int max_listed = 2) const;
};

EssReport summarize(const std::vector<ReplicaSummary>& replicas);

}  // namespace grhmc
