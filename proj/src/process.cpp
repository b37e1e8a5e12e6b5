#include "grhmc/process.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace grhmc {

Eigen::Index StateLayout::offset(Accumulator a) const {
  if (!(accumulators & a)) return -1;
  Eigen::Index off = 2 * dim + 1;
  for (unsigned bit : {kIntegratedPosition, kIntegratedPositionSquared,
                       kIntegratedSquaredGradient}) {
    if (bit == static_cast<unsigned>(a)) return off;
    if (accumulators & bit) off += dim;
  }
  return -1;
}

Eigen::Index StateLayout::size() const {
  Eigen::Index n = 2 * dim + 1;
  for (unsigned bit : {kIntegratedPosition, kIntegratedPositionSquared,
                       kIntegratedSquaredGradient})
    if (accumulators & bit) n += dim;
  return n;
}

void standardized_rhs(const TargetModel& target, const ScalingState& scaling,
                      double lambda, const StateLayout& layout, const Vector& y,
                      Vector& dydt, Vector& q, Vector& grad) {
  const Eigen::Index d = layout.dim;
  q = scaling.m + scaling.s.cwiseProduct(y.segment(layout.qbar(), d));
  target.log_density(q, grad);
  dydt.segment(layout.qbar(), d) = y.segment(layout.pbar(), d);
  dydt.segment(layout.pbar(), d) = scaling.s.cwiseProduct(grad);
  dydt[layout.rate_integral()] = lambda;
  if (const auto o = layout.offset(kIntegratedPosition); o >= 0)
    dydt.segment(o, d) = q;
  if (const auto o = layout.offset(kIntegratedPositionSquared); o >= 0)
    dydt.segment(o, d) = q.array().square().matrix();
  if (const auto o = layout.offset(kIntegratedSquaredGradient); o >= 0)
    dydt.segment(o, d) = grad.array().square().matrix();
}

Vector momentum_refresh(Rng& rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector p(dim);
  for (int j = 0; j < dim; ++j) p[j] = normal(rng);
  return p;
}

double next_refresh_time(Rng& rng) {
  std::exponential_distribution<double> exponential(1.0);
  return exponential(rng);
}

Process::Process(const TargetModel& target, ode::IntegratorConfig config,
                 std::uint64_t seed, double lambda)
    : target_(target),
      scaling_(ScalingState::identity(target.dim())),
      lambda_(lambda),
      layout_{target.dim(), kNoAccumulators},
      rng_(seed),
      config_(config),
      integrator_(ode::OdeSystem{1, [](double, const Vector&, Vector& f) { f.setZero(); }, {}},
                  config),
      q_scratch_(target.dim()),
      grad_scratch_(target.dim()) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  Vector y = Vector::Zero(layout_.size());
  y.segment(layout_.pbar(), dim()) = momentum_refresh(rng_, dim());
  threshold_ = next_refresh_time(rng_);
  rebuild_system(kNoAccumulators);
  integrator_.reset(0.0, y);
}

void Process::rebuild_system(unsigned accumulators) {
  layout_.accumulators = accumulators;
  ode::OdeSystem sys;
  sys.state_dim = layout_.size();
  sys.rhs = [this](double, const Vector& y, Vector& dydt) {
    standardized_rhs(target_, scaling_, lambda_, layout_, y, dydt, q_scratch_,
                     grad_scratch_);
  };
  integrator_.set_system(std::move(sys));
  install_roots();
}

void Process::install_roots() {
  std::vector<ode::RootFn> roots;
  const Eigen::Index rate = layout_.rate_integral();
  roots.push_back([this, rate](double, const Vector& y) { return y[rate] - threshold_; });
  if (crossings_on_) {
    for (int j = 0; j < dim(); ++j)
      roots.push_back([j](double, const Vector& y) { return y[j]; });
  }
  integrator_.set_root_functions(std::move(roots));
}

Vector& Process::working_state() {
  if (event_state_) return *event_state_;
  pending_ = integrator_.state();
  return pending_;
}

void Process::commit() {
  if (!event_state_) integrator_.reset(integrator_.time(), pending_);
}

void Process::set_scaling(const ScalingState& next) {
  next.validate();
  if (next.dim() != dim()) throw std::invalid_argument("scaling has wrong dimension");
  Vector& y = working_state();
  y.segment(layout_.qbar(), dim()) =
      reanchor(Vector(y.segment(layout_.qbar(), dim())), scaling_, next);
  scaling_ = next;
  commit();
}

void Process::set_scaling_coordinate(int j, double m, double s) {
  if (!(s > 0.0) || !std::isfinite(s) || !std::isfinite(m))
    throw std::invalid_argument("scaling: S must be finite and positive");
  Vector& y = working_state();
  y[layout_.qbar() + j] = reanchor(y[layout_.qbar() + j], scaling_.m[j], scaling_.s[j], m, s);
  scaling_.m[j] = m;
  scaling_.s[j] = s;
  commit();
}

void Process::set_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("lambda must be finite and nonnegative");
  if (lambda == lambda_) return;
  working_state();
  lambda_ = lambda;
  commit();
}

Vector Process::position() const {
  const Vector& y = event_state_ ? *event_state_ : integrator_.state();
  return scaling_.to_position(y.segment(layout_.qbar(), dim()));
}

Vector Process::standardized_position() const {
  const Vector& y = event_state_ ? *event_state_ : integrator_.state();
  return y.segment(layout_.qbar(), dim());
}

Vector Process::momentum() const {
  const Vector& y = event_state_ ? *event_state_ : integrator_.state();
  return y.segment(layout_.pbar(), dim());
}

void Process::set_phase_state(const Vector& qbar, const Vector& pbar) {
  if (qbar.size() != dim() || pbar.size() != dim())
    throw std::invalid_argument("phase state has wrong dimension");
  Vector& y = working_state();
  y.segment(layout_.qbar(), dim()) = qbar;
  y.segment(layout_.pbar(), dim()) = pbar;
  commit();
}

double Process::hamiltonian() const {
  Vector grad(dim());
  const Vector p = momentum();
  return -target_.log_density(position(), grad) + 0.5 * p.squaredNorm();
}

void Process::start_accumulators(unsigned set) {
  if (event_state_)
    throw std::logic_error("accumulators cannot be changed inside an event");
  const Vector old = integrator_.state();
  const Eigen::Index keep = 2 * dim() + 1;
  rebuild_system(set);
  Vector y = Vector::Zero(layout_.size());
  y.head(keep) = old.head(keep);
  integrator_.reset(integrator_.time(), y);
  accumulation_start_ = integrator_.time();
}

Vector Process::accumulator(Accumulator a) const {
  const auto o = layout_.offset(a);
  if (o < 0) throw std::logic_error("accumulator not enabled");
  const Vector& y = event_state_ ? *event_state_ : integrator_.state();
  return y.segment(o, dim());
}

void Process::enable_crossing_events(bool on) {
  if (on == crossings_on_) return;
  crossings_on_ = on;
  install_roots();
}

void Process::advance(double t_end, const Hooks& hooks) {
  if (!(t_end > time())) return;
  auto handler = [&](const ode::Event& ev, Vector& state) {
    event_state_ = &state;
    event_time_ = ev.time;
    struct Release {
      Vector*& slot;
      ~Release() { slot = nullptr; }
    } release{event_state_};
    if (ev.root == 0) {
      state.segment(layout_.pbar(), dim()) = momentum_refresh(rng_, dim());
      state[layout_.rate_integral()] = 0.0;
      threshold_ = next_refresh_time(rng_);
      ++refreshes_;
      if (hooks.on_refresh) hooks.on_refresh(*this);
    } else {
      ++crossings_;
      if (hooks.on_crossing) hooks.on_crossing(*this, static_cast<int>(ev.root) - 1);
    }
    return ode::EventAction::kContinue;
  };
  try {
    integrator_.integrate_until(t_end, handler);
  } catch (const ode::IntegrationError& e) {
    Vector q = scaling_.to_position(e.state.segment(layout_.qbar(), dim()));
    std::ostringstream msg;
    msg << "integration failed at t = " << e.time << " (" << e.what()
        << "), q = [" << q.transpose() << "]";
    throw ChainError(msg.str(), e.time, std::move(q));
  }
}

long ProcessConfig::sample_count() const {
  return static_cast<long>(std::floor(t_sample / sample_spacing + 1e-9));
}

void ProcessConfig::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  if (!(sample_spacing > 0.0)) throw std::invalid_argument("sample spacing must be positive");
  if (!(t_sample > 0.0)) throw std::invalid_argument("t_sample must be positive");
  if (!(t_burn_scale >= 0.0) || !(t_burn_lambda >= 0.0))
    throw std::invalid_argument("burn-in durations must be nonnegative");
  if (sample_count() < 1) throw std::invalid_argument("no samples fit in t_sample");
}

SmoothedLambda::SmoothedLambda(Proposal proposal, double smoothing)
    : proposal_(std::move(proposal)), smoothing_(smoothing) {
  if (!proposal_) throw std::invalid_argument("lambda proposal is empty");
  if (!(smoothing_ >= 0.0 && smoothing_ <= 1.0))
    throw std::invalid_argument("smoothing factor must lie in [0, 1]");
}

double SmoothedLambda::on_refresh(const Process& process, double current) {
  return smoothing_ * current + (1.0 - smoothing_) * proposal_(process);
}

ChainOutput simulate_chain(const TargetModel& target, ScaleTuner& tuner,
                           const ProcessConfig& config,
                           const ode::IntegratorConfig& integrator,
                           LambdaTuner* lambda_tuner) {
  config.validate();
  Process p(target, integrator, config.seed, config.lambda);
  ChainOutput out;
  out.seed = config.seed;

  auto run_phase = [&](const std::string& name, auto&& body) {
    PhaseRecord rec{name, p.time(), p.time(), p.rhs_evals(), p.refresh_count(),
                    p.crossing_count()};
    body();
    rec.t_end = p.time();
    rec.rhs_evals = p.rhs_evals() - rec.rhs_evals;
    rec.refreshes = p.refresh_count() - rec.refreshes;
    rec.crossings = p.crossing_count() - rec.crossings;
    out.phases.push_back(std::move(rec));
  };

  run_phase("burn_scale", [&] { tuner.adapt(p, config.t_burn_scale); });

  run_phase("burn_lambda", [&] {
    p.enable_crossing_events(false);
    p.set_lambda(config.lambda);
    ConstantLambda constant;
    LambdaTuner& lt = lambda_tuner ? *lambda_tuner : constant;
    Process::Hooks hooks;
    hooks.on_refresh = [&](Process& pr) { pr.set_lambda(lt.on_refresh(pr, pr.lambda())); };
    p.advance(config.t_burn(), hooks);
  });

  run_phase("sampling", [&] {
    const double t0 = config.t_burn();
    if (config.time_averages)
      p.start_accumulators(kIntegratedPosition | kIntegratedPositionSquared);
    const long n = config.sample_count();
    out.samples.resize(n, p.dim());
    for (long i = 0; i < n; ++i) {
      const double ti = t0 + config.sample_spacing * static_cast<double>(i);
      p.advance(ti);
      out.samples.row(i) = p.position().transpose();
    }
    p.advance(config.total_time());
    if (config.time_averages) {
      const double span = p.accumulation_time();
      out.time_average_mean = p.accumulator(kIntegratedPosition) / span;
      out.time_average_second_moment = p.accumulator(kIntegratedPositionSquared) / span;
    }
  });

  out.n_ode = p.rhs_evals();
  out.scaling = p.scaling();
  out.lambda = p.lambda();
  return out;
}

}  // namespace grhmc
