#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace grhmc::ode {

using Vector = Eigen::VectorXd;

struct IntegratorConfig {
  double abs_tol = 1e-6;
  double rel_tol = 1e-6;
  double max_step = std::numeric_limits<double>::infinity();
  std::optional<double> initial_step;  // automatic when empty
};

using Rhs = std::function<void(double t, const Vector& y, Vector& dydt)>;
/// An event fires when a root function changes sign along the trajectory.
using RootFn = std::function<double(double t, const Vector& y)>;

struct OdeSystem {
  Eigen::Index state_dim = 0;
  Rhs rhs;
  std::vector<RootFn> root_fns;
};

/// Step size underflow or a non-finite right-hand side.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double t, Vector state)
      : std::runtime_error(what), time(t), state(std::move(state)) {}
  double time;
  Vector state;
};

/**
 * Continuous extension of one step (seventh order, exact at both end points).
 */
class DenseOutput {
 public:
  double t_begin() const noexcept { return t0_; }
  double t_end() const noexcept { return t0_ + h_; }

  void evaluate(double t, Vector& out) const;
  Vector operator()(double t) const {
    Vector out(y0_.size());
    evaluate(t, out);
    return out;
  }

 private:
  friend class Integrator;
  double t0_ = 0.0;
  double h_ = 0.0;
  Vector y0_;
  std::array<Vector, 7> coef_;
};

struct Event {
  std::size_t root = 0;
  double time = 0.0;
  Vector state;
  int direction = 0;  // sign of the root function after the crossing
};

struct StepResult {
  double t_old = 0.0;
  double t_new = 0.0;
  Vector state_new;
  std::uint64_t n_rhs_evals = 0;  // evaluations spent on this step, including dense output
  std::vector<Event> events;      // sorted by time
};

/**
 * Root of g on [t_lo, t_hi] given g(t_lo) * g(t_hi) <= 0, by Illinois-modified
 * regula falsi with a bisection fallback. The returned point is on the far
 * side of the sign change (or an exact zero).
 */
double find_root(const std::function<double(double)>& g, double t_lo,
                 double t_hi, double g_lo, double g_hi);

/**
 * Earliest sign change of root_fn along the interpolant on [t_lo, t_hi].
 * The interval is scanned in sub-intervals so the first of several crossings
 * is the one located. Empty when no sign change is found.
 */
std::optional<double> find_event(const DenseOutput& dense, const RootFn& root_fn,
                                 double t_lo, double t_hi);

enum class EventAction { kContinue, kStop };
enum class StopReason { kHorizon, kHandler };

/// Receives the event and the state at the event time, which it may modify.
using EventHandler = std::function<EventAction(const Event&, Vector& state)>;

/**
 * Adaptive explicit Runge-Kutta integrator, Dormand-Prince 8(5,3), with
 * per-component error control against abs_tol + rel_tol * |y_i|.
 *
 * The continuous extension costs three extra right-hand side calls and is
 * only built for steps that need it (a root changed sign, or dense_output()
 * was called). Every call of the right-hand side is counted in rhs_evals().
 */
class Integrator {
 public:
  Integrator(OdeSystem system, IntegratorConfig config);

  /// Restart from (t, y). Costs one rhs evaluation and re-reads root signs.
  void reset(double t, const Vector& y);

  /**
   * Take one accepted step that does not pass t_limit. The result stays
   * valid until the next call on this integrator. Sign changes of the root
   * functions are reported but not acted upon.
   */
  const StepResult& step(double t_limit);
  const StepResult& result() const noexcept { return result_; }

  /// Interpolant over the last accepted step; valid until the next step or reset.
  const DenseOutput& dense_output();

  /**
   * Integrate to t_end. At each event the integrator is rewound to the event
   * time, `on_event` may modify the state, and integration restarts from
   * there. Later events of the same step are re-detected after the restart.
   */
  StopReason integrate_until(double t_end, const EventHandler& on_event);

  /**
   * Swap in a new system (possibly of another size). The evaluation counter
   * and step size proposal carry over; call reset() before stepping again.
   */
  void set_system(OdeSystem system);
  void set_root_functions(std::vector<RootFn> roots);
  std::size_t root_count() const noexcept { return system_.root_fns.size(); }

  double time() const noexcept { return t_; }
  const Vector& state() const noexcept { return y_; }
  const Vector& derivative() const noexcept { return f_; }
  std::uint64_t rhs_evals() const noexcept { return n_rhs_; }
  double step_size() const noexcept { return h_; }
  const IntegratorConfig& config() const noexcept { return config_; }

 private:
  void eval_rhs(double t, const Vector& y, Vector& out);
  double initial_step();
  void read_root_signs();
  void build_dense();

  OdeSystem system_;
  IntegratorConfig config_;
  double t_ = 0.0;
  double h_ = 0.0;
  bool started_ = false;
  Vector y_, f_;
  std::uint64_t n_rhs_ = 0;
  std::vector<int> root_signs_;

  // stage workspace; k_[0] is f at the step start, k_[12] f at its end
  std::array<Vector, 16> k_;
  Vector y_old_, ytmp_, ynew_, err5_, err3_;
  double h_last_ = 0.0;
  bool dense_ready_ = false;
  DenseOutput dense_;
  StepResult result_;
};

}  // namespace grhmc::ode
