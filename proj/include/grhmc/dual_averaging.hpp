#pragma once

namespace grhmc {

struct DualAveragingParams {
  double anchor = 0.0;      // log-scale value the iterates are shrunk towards
  double shrinkage = 10.0;  // gamma
  double offset = 10.0;     // k0
  double exponent = 0.75;   // kappa, learning rate eta_k = k^-kappa
};

/**
 * Dual averaging on a log scale, driving the running mean of the observed
 * statistic H = target - observation to zero.
 */
class DualAveraging {
 public:
  explicit DualAveraging(DualAveragingParams params = {}, double target = 0.0);

  /// Feed one observation; returns the new iterate log S.
  double update(double observation);
  /// Start over with new parameters; the averaged iterate restarts at the anchor.
  void restart(DualAveragingParams params);

  double iterate() const noexcept { return log_iterate_; }
  double averaged() const noexcept { return log_averaged_; }
  long iterations() const noexcept { return k_; }
  double residual_sum() const noexcept { return h_sum_; }
  double target() const noexcept { return target_; }
  const DualAveragingParams& params() const noexcept { return params_; }

 private:
  DualAveragingParams params_;
  double target_;
  long k_ = 0;
  double h_sum_ = 0.0;
  double log_iterate_ = 0.0;
  double log_averaged_ = 0.0;
};

}  // namespace grhmc
