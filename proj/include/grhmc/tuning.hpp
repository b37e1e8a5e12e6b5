#pragma once

#include "grhmc/dual_averaging.hpp"
#include "grhmc/p2.hpp"
#include "grhmc/process.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace grhmc {

enum class Method { kVari, kIsg, kMct, kNone };

std::string to_string(Method method);
/// Accepts "vari", "isg", "mct", "none" in any case.
Method parse_method(const std::string& text);

inline constexpr double kVarianceFloor = 1e-8;

/// m = int q / t, S = sqrt(int q^2 / t - m^2) floored at sqrt(variance_floor).
/// `floored` (optional) receives the number of coordinates that hit the floor.
ScalingState vari_update(const Vector& int_q, const Vector& int_q2, double t,
                         int* floored = nullptr, double variance_floor = kVarianceFloor);

/// m = int q / t, S = (int g^2 / t)^(-1/2). Throws on a zero gradient integral.
ScalingState isg_update(const Vector& int_q, const Vector& int_g2, double t);

/**
 * Time-integrated moment tuners. Accumulators run from the start of the phase
 * without reset; (m, S) are recomputed at every refresh event and once more
 * at the end of the phase.
 */
class VariIsgTuner final : public ScaleTuner {
 public:
  explicit VariIsgTuner(Method method);
  std::string name() const override { return to_string(method_); }
  void adapt(Process& process, double duration) override;

  long updates() const noexcept { return updates_; }
  long floor_hits() const noexcept { return floor_hits_; }

 private:
  ScalingState estimate(const Process& process);

  Method method_;
  long updates_ = 0;
  long floor_hits_ = 0;
};

struct MctStageParams {
  double shrinkage;     // gamma
  double anchor_scale;  // alpha; the anchor is alpha * log S at stage start
};

struct MctSchedule {
  double stage_ratio = 0.2;     // t_burn1 / t_burn2
  double warmup_fraction = 0.05;  // c_burn
  double grid_spacing = 1.0;    // P-square feed interval
  double target_time = 3.14159265358979323846;  // desired mean crossing interval
  double lambda = 0.2;          // refresh rate while tuning
  double exponent = 0.75;       // kappa
  double offset = 10.0;         // k0
  MctStageParams stage1{10.0, 0.0};
  MctStageParams stage2{25.0, 1.1};

  /// Split a total duration into (t_burn1, t_burn2).
  std::pair<double, double> stage_durations(double total) const;
  void validate() const;
};

struct MctStageReport {
  double t_begin = 0.0;
  double t_end = 0.0;
  ScalingState output;       // m from P-square, S = exp(averaged log S)
  std::vector<long> updates;  // dual averaging iterations per coordinate
};

/**
 * Median crossing time tuner: dual averaging of log S_j driven by the time
 * between zero crossings of qbar_j, with m tracked by P-square medians.
 */
class MctTuner final : public ScaleTuner {
 public:
  explicit MctTuner(MctSchedule schedule = {});
  std::string name() const override { return "MCT"; }
  void adapt(Process& process, double duration) override;

  const std::vector<MctStageReport>& stages() const noexcept { return stages_; }
  const MctSchedule& schedule() const noexcept { return schedule_; }

 private:
  MctStageReport run_stage(Process& process, double duration,
                           const MctStageParams& params);

  MctSchedule schedule_;
  std::vector<MctStageReport> stages_;
};

/// No adaptation: runs the phase with a fixed scaling (identity by default).
class FixedScaling final : public ScaleTuner {
 public:
  explicit FixedScaling(std::optional<ScalingState> scaling = std::nullopt)
      : scaling_(std::move(scaling)) {}
  std::string name() const override { return "none"; }
  void adapt(Process& process, double duration) override;

 private:
  std::optional<ScalingState> scaling_;
};

std::unique_ptr<ScaleTuner> make_tuner(Method method, const MctSchedule& schedule = {});

}  // namespace grhmc
