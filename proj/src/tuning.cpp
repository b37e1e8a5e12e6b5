#include "grhmc/tuning.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace grhmc {

std::string to_string(Method method) {
  switch (method) {
    case Method::kVari: return "VARI";
    case Method::kIsg: return "ISG";
    case Method::kMct: return "MCT";
    case Method::kNone: return "none";
  }
  return "?";
}

Method parse_method(const std::string& text) {
  std::string s = text;
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "vari") return Method::kVari;
  if (s == "isg") return Method::kIsg;
  if (s == "mct") return Method::kMct;
  if (s == "none") return Method::kNone;
  throw std::invalid_argument("unknown tuning method '" + text + "'");
}

ScalingState vari_update(const Vector& int_q, const Vector& int_q2, double t,
                         int* floored, double variance_floor) {
  if (!(t > 0.0)) throw std::invalid_argument("accumulation time must be positive");
  ScalingState out;
  out.m = int_q / t;
  out.s.resize(int_q.size());
  int hits = 0;
  for (Eigen::Index j = 0; j < int_q.size(); ++j) {
    double var = int_q2[j] / t - out.m[j] * out.m[j];
    if (!(var >= variance_floor)) {
      var = variance_floor;
      ++hits;
    }
    out.s[j] = std::sqrt(var);
  }
  if (floored) *floored = hits;
  return out;
}

ScalingState isg_update(const Vector& int_q, const Vector& int_g2, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("accumulation time must be positive");
  ScalingState out;
  out.m = int_q / t;
  out.s.resize(int_g2.size());
  for (Eigen::Index j = 0; j < int_g2.size(); ++j) {
    if (!(int_g2[j] > 0.0))
      throw std::runtime_error("ISG: integrated squared gradient is zero (flat target)");
    out.s[j] = 1.0 / std::sqrt(int_g2[j] / t);
  }
  return out;
}

VariIsgTuner::VariIsgTuner(Method method) : method_(method) {
  if (method != Method::kVari && method != Method::kIsg)
    throw std::invalid_argument("VariIsgTuner needs VARI or ISG");
}

ScalingState VariIsgTuner::estimate(const Process& process) {
  const double t = process.accumulation_time();
  if (method_ == Method::kVari) {
    int hits = 0;
    ScalingState s = vari_update(process.accumulator(kIntegratedPosition),
                                 process.accumulator(kIntegratedPositionSquared), t, &hits);
    floor_hits_ += hits;
    return s;
  }
  return isg_update(process.accumulator(kIntegratedPosition),
                    process.accumulator(kIntegratedSquaredGradient), t);
}

void VariIsgTuner::adapt(Process& process, double duration) {
  if (!(duration > 0.0)) return;
  const unsigned second = method_ == Method::kVari ? kIntegratedPositionSquared
                                                   : kIntegratedSquaredGradient;
  process.start_accumulators(kIntegratedPosition | second);
  const double t_end = process.time() + duration;
  Process::Hooks hooks;
  hooks.on_refresh = [this](Process& p) {
    if (!(p.accumulation_time() > 0.0)) return;
    p.set_scaling(estimate(p));
    ++updates_;
  };
  process.advance(t_end, hooks);
  process.set_scaling(estimate(process));
  ++updates_;
  process.start_accumulators(kNoAccumulators);
}

std::pair<double, double> MctSchedule::stage_durations(double total) const {
  const double second = total / (1.0 + stage_ratio);
  return {stage_ratio * second, second};
}

void MctSchedule::validate() const {
  if (!(stage_ratio >= 0.0)) throw std::invalid_argument("MCT: stage ratio must be nonnegative");
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0))
    throw std::invalid_argument("MCT: warm-up fraction must lie in [0, 1]");
  if (!(grid_spacing > 0.0)) throw std::invalid_argument("MCT: grid spacing must be positive");
  if (!(target_time > 0.0)) throw std::invalid_argument("MCT: target time must be positive");
  if (!(lambda >= 0.0)) throw std::invalid_argument("MCT: lambda must be nonnegative");
  if (!(stage1.shrinkage > 0.0) || !(stage2.shrinkage > 0.0))
    throw std::invalid_argument("MCT: shrinkage must be positive");
  DualAveragingParams check{0.0, 1.0, offset, exponent};
  DualAveraging{check};
}

MctTuner::MctTuner(MctSchedule schedule) : schedule_(schedule) { schedule_.validate(); }

MctStageReport MctTuner::run_stage(Process& process, double duration,
                                   const MctStageParams& params) {
  const int d = process.dim();
  const MctSchedule& sc = schedule_;
  MctStageReport report;
  report.t_begin = process.time();
  const double t_end = report.t_begin + duration;
  const double t_opt = report.t_begin + sc.warmup_fraction * duration;

  std::vector<P2Quantile> medians(static_cast<std::size_t>(d), P2Quantile(0.5));
  std::vector<DualAveraging> averaging;
  averaging.reserve(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    DualAveragingParams dp{params.anchor_scale * std::log(process.scaling().s[j]),
                           params.shrinkage, sc.offset, sc.exponent};
    averaging.emplace_back(dp, sc.target_time);
  }
  std::vector<double> last_crossing(static_cast<std::size_t>(d),
                                    std::numeric_limits<double>::quiet_NaN());

  Process::Hooks hooks;
  hooks.on_crossing = [&](Process& p, int j) {
    const auto ju = static_cast<std::size_t>(j);
    const double t = p.time();
    if (std::isnan(last_crossing[ju])) {
      last_crossing[ju] = t;
      return;
    }
    const double interval = t - last_crossing[ju];
    last_crossing[ju] = t;
    const double log_s = averaging[ju].update(interval);
    p.set_scaling_coordinate(j, medians[ju].estimate(), std::exp(log_s));
  };

  auto start_optimizing = [&] {
    ScalingState next = process.scaling();
    for (int j = 0; j < d; ++j)
      if (medians[static_cast<std::size_t>(j)].count() > 0)
        next.m[j] = medians[static_cast<std::size_t>(j)].estimate();
    process.set_scaling(next);
    process.enable_crossing_events(true);
  };

  bool optimizing = false;
  if (t_opt <= report.t_begin) {
    start_optimizing();
    optimizing = true;
  }
  for (long i = 1;; ++i) {
    const double t_grid = report.t_begin + sc.grid_spacing * static_cast<double>(i);
    if (t_grid > t_end + 1e-9 * std::max(1.0, std::abs(t_end))) break;
    if (!optimizing && t_opt < t_grid) {
      process.advance(t_opt, hooks);
      start_optimizing();
      optimizing = true;
    }
    process.advance(t_grid, hooks);
    const Vector q = process.position();
    for (int j = 0; j < d; ++j) medians[static_cast<std::size_t>(j)].insert(q[j]);
    if (!optimizing && t_grid >= t_opt) {
      start_optimizing();
      optimizing = true;
    } else if (optimizing) {
      ScalingState next = process.scaling();
      for (int j = 0; j < d; ++j) next.m[j] = medians[static_cast<std::size_t>(j)].estimate();
      process.set_scaling(next);
    }
  }
  if (!optimizing) start_optimizing();
  process.advance(t_end, hooks);
  process.enable_crossing_events(false);

  report.t_end = process.time();
  report.output = process.scaling();
  report.updates.resize(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    report.updates[ju] = averaging[ju].iterations();
    if (medians[ju].count() > 0) report.output.m[j] = medians[ju].estimate();
    if (averaging[ju].iterations() > 0)
      report.output.s[j] = std::exp(averaging[ju].averaged());
  }
  process.set_scaling(report.output);
  return report;
}

void MctTuner::adapt(Process& process, double duration) {
  stages_.clear();
  if (!(duration > 0.0)) return;
  process.set_lambda(schedule_.lambda);
  const auto [first, second] = schedule_.stage_durations(duration);
  if (first > 0.0) stages_.push_back(run_stage(process, first, schedule_.stage1));
  stages_.push_back(run_stage(process, second, schedule_.stage2));
}

void FixedScaling::adapt(Process& process, double duration) {
  if (scaling_) process.set_scaling(*scaling_);
  if (duration > 0.0) process.advance(process.time() + duration);
}

std::unique_ptr<ScaleTuner> make_tuner(Method method, const MctSchedule& schedule) {
  switch (method) {
    case Method::kVari:
    case Method::kIsg: return std::make_unique<VariIsgTuner>(method);
    case Method::kMct: return std::make_unique<MctTuner>(schedule);
    case Method::kNone: return std::make_unique<FixedScaling>();
  }
  throw std::invalid_argument("unknown method");
}

}  // namespace grhmc
