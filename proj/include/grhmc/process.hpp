#pragma once

#include "grhmc/ode.hpp"
#include "grhmc/scaling.hpp"
#include "grhmc/targets.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace grhmc {

using Rng = std::mt19937_64;

/// Time integrals carried along with the dynamics, each of length d.
enum Accumulator : unsigned {
  kNoAccumulators = 0,
  kIntegratedPosition = 1u << 0,         // int q_j du
  kIntegratedPositionSquared = 1u << 1,  // int q_j^2 du
  kIntegratedSquaredGradient = 1u << 2,  // int (d/dq_j log pi~)^2 du
};

/// Where each block lives in the ODE state [qbar | pbar | Lambda | accumulators].
struct StateLayout {
  int dim = 0;
  unsigned accumulators = kNoAccumulators;

  Eigen::Index qbar() const { return 0; }
  Eigen::Index pbar() const { return dim; }
  Eigen::Index rate_integral() const { return 2 * dim; }
  /// Offset of an accumulator block, or -1 when it is not enabled.
  Eigen::Index offset(Accumulator a) const;
  Eigen::Index size() const;
};

/**
 * Right-hand side of the standardized Hamiltonian flow plus quadratures:
 * d qbar = pbar, d pbar = S * grad log pi~(m + S qbar), d Lambda = lambda and
 * one entry per enabled accumulator. Exactly one target evaluation.
 * `q` and `grad` are caller-provided scratch of length d.
 */
void standardized_rhs(const TargetModel& target, const ScalingState& scaling,
                      double lambda, const StateLayout& layout, const Vector& y,
                      Vector& dydt, Vector& q, Vector& grad);

/// Full momentum refresh pbar ~ N(0, I).
Vector momentum_refresh(Rng& rng, int dim);

/// Exponential threshold E ~ Exp(1); the next refresh fires when int lambda dt reaches E.
double next_refresh_time(Rng& rng);

/**
 * A numerically simulated GRHMC trajectory: Hamiltonian flow between events,
 * momentum refreshes at rate lambda, optional median-crossing events and
 * quadrature accumulators.
 *
 * Random numbers are drawn from one stream in this order: d normals for the
 * initial momentum, the first exponential threshold, then at every refresh d
 * normals followed by one exponential threshold.
 */
class Process {
 public:
  struct Hooks {
    std::function<void(Process&)> on_refresh;
    std::function<void(Process&, int coordinate)> on_crossing;
  };

  Process(const TargetModel& target, ode::IntegratorConfig config,
          std::uint64_t seed, double lambda);
  Process(const Process&) = delete;
  Process& operator=(const Process&) = delete;

  int dim() const noexcept { return layout_.dim; }
  /// Inside an event handler this is the event time.
  double time() const noexcept { return event_state_ ? event_time_ : integrator_.time(); }
  const TargetModel& target() const noexcept { return target_; }
  const StateLayout& layout() const noexcept { return layout_; }

  const ScalingState& scaling() const noexcept { return scaling_; }
  /// Replace (m, S) and re-anchor qbar so that q is unchanged.
  void set_scaling(const ScalingState& next);
  void set_scaling_coordinate(int j, double m, double s);

  double lambda() const noexcept { return lambda_; }
  void set_lambda(double lambda);

  Vector position() const;
  Vector standardized_position() const;
  Vector momentum() const;
  /// Overwrites qbar and pbar (for experiments with a prescribed start).
  void set_phase_state(const Vector& qbar, const Vector& pbar);

  /// H = -log pi~(m + S qbar) + |pbar|^2 / 2.
  double hamiltonian() const;

  /// Zero and (re)start the given accumulators from the current time.
  void start_accumulators(unsigned set);
  Vector accumulator(Accumulator a) const;
  double accumulation_time() const noexcept { return time() - accumulation_start_; }

  void enable_crossing_events(bool on);
  bool crossing_events_enabled() const noexcept { return crossings_on_; }

  /// Integrate to t_end, dispatching refresh and crossing events to `hooks`.
  void advance(double t_end, const Hooks& hooks = {});

  std::uint64_t rhs_evals() const noexcept { return integrator_.rhs_evals(); }
  std::uint64_t refresh_count() const noexcept { return refreshes_; }
  std::uint64_t crossing_count() const noexcept { return crossings_; }
  Rng& rng() noexcept { return rng_; }

 private:
  Vector& working_state();
  void commit();
  void rebuild_system(unsigned accumulators);
  void install_roots();

  const TargetModel& target_;
  ScalingState scaling_;
  double lambda_;
  StateLayout layout_;
  Rng rng_;
  double threshold_ = 0.0;
  ode::IntegratorConfig config_;
  ode::Integrator integrator_;
  bool crossings_on_ = false;
  double accumulation_start_ = 0.0;
  std::uint64_t refreshes_ = 0;
  std::uint64_t crossings_ = 0;

  // While an event handler runs, modifications go to the event state.
  Vector* event_state_ = nullptr;
  double event_time_ = 0.0;
  Vector pending_;
  Vector q_scratch_, grad_scratch_;
};

struct ProcessConfig {
  double lambda = 0.2;            // lambda_initial
  double sample_spacing = 2.0;    // Delta
  double t_sample = 100000.0;
  double t_burn_scale = 6000.0;   // m and S adaptation
  double t_burn_lambda = 5000.0;  // m and S frozen, lambda adaptation
  std::uint64_t seed = 1;
  bool time_averages = true;      // integrate q and q^2 over the sampling period

  double t_burn() const { return t_burn_scale + t_burn_lambda; }
  double total_time() const { return t_burn() + t_sample; }
  long sample_count() const;
  void validate() const;
};

/// Adapts (m, S) during the first burn-in phase, leaving them frozen on return.
class ScaleTuner {
 public:
  virtual ~ScaleTuner() = default;
  virtual std::string name() const = 0;
  virtual void adapt(Process& process, double duration) = 0;
};

/// Chooses lambda at refresh events while (m, S) are frozen.
class LambdaTuner {
 public:
  virtual ~LambdaTuner() = default;
  virtual double on_refresh(const Process& process, double current) = 0;
};

class ConstantLambda final : public LambdaTuner {
 public:
  double on_refresh(const Process&, double current) override { return current; }
};

/// lambda <- smoothing * lambda + (1 - smoothing) * proposal(process).
class SmoothedLambda final : public LambdaTuner {
 public:
  using Proposal = std::function<double(const Process&)>;
  explicit SmoothedLambda(Proposal proposal, double smoothing = 0.99);
  double on_refresh(const Process& process, double current) override;

 private:
  Proposal proposal_;
  double smoothing_;
};

struct PhaseRecord {
  std::string name;
  double t_begin = 0.0;
  double t_end = 0.0;
  std::uint64_t rhs_evals = 0;
  std::uint64_t refreshes = 0;
  std::uint64_t crossings = 0;
};

struct ChainOutput {
  Matrix samples;  // N x d
  std::uint64_t n_ode = 0;
  ScalingState scaling;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::vector<PhaseRecord> phases;
  Vector time_average_mean;            // empty unless requested
  Vector time_average_second_moment;
};

/// Replica failure with the integration diagnostics attached.
class ChainError : public std::runtime_error {
 public:
  ChainError(const std::string& what, double t, Vector position)
      : std::runtime_error(what), time(t), position(std::move(position)) {}
  double time;
  Vector position;
};

/**
 * Burn-in with `tuner`, a lambda phase with (m, S) frozen, then
 * N = floor(t_sample / Delta) samples q(t_burn + Delta i), i = 0..N-1.
 */
ChainOutput simulate_chain(const TargetModel& target, ScaleTuner& tuner,
                           const ProcessConfig& config,
                           const ode::IntegratorConfig& integrator,
                           LambdaTuner* lambda_tuner = nullptr);

}  // namespace grhmc
