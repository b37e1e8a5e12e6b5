#include "grhmc/ode.hpp"

#include "dop853_tableau.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace grhmc::ode {
namespace {

namespace tab = dop853;

constexpr int kScanIntervals = 8;

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

double min_step(double t) {
  return std::max(1e-14, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(t));
}

double width_tolerance(double t) {
  return std::max(1e-12, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(t));
}

// First sign change of g on [t_lo, t_hi] relative to start_sign.
std::optional<double> locate(const std::function<double(double)>& g,
                             double t_lo, double t_hi, int start_sign) {
  double a = t_lo;
  double ga = g(a);
  if (start_sign == 0) {
    start_sign = sign_of(ga);
    if (start_sign == 0) return t_lo;
  }
  for (int k = 1; k <= kScanIntervals; ++k) {
    const double b = (k == kScanIntervals)
                         ? t_hi
                         : t_lo + (t_hi - t_lo) * k / kScanIntervals;
    const double gb = g(b);
    const int sb = sign_of(gb);
    if (sb == 0) return b;
    if (sb != start_sign) return find_root(g, a, b, ga, gb);
    a = b;
    ga = gb;
  }
  return std::nullopt;
}

}  // namespace

void DenseOutput::evaluate(double t, Vector& out) const {
  const double x = (t - t0_) / h_;
  out.setZero(y0_.size());
  for (int i = 0; i < 7; ++i) {
    out += coef_[static_cast<std::size_t>(6 - i)];
    out *= (i % 2 == 0) ? x : 1.0 - x;
  }
  out += y0_;
}

double find_root(const std::function<double(double)>& g, double t_lo,
                 double t_hi, double g_lo, double g_hi) {
  if (g_hi == 0.0) return t_hi;
  if (g_lo == 0.0 && sign_of(g_hi) == 0) return t_lo;
  const int far_sign = sign_of(g_hi);
  const double ftol = 1e-10 * std::max({1.0, std::abs(g_lo), std::abs(g_hi)});
  double a = t_lo, fa = g_lo, b = t_hi, fb = g_hi;
  int last_side = 0;
  for (int it = 0; it < 200; ++it) {
    if (b - a <= width_tolerance(b)) break;
    double c = (fb != fa) ? b - fb * (b - a) / (fb - fa) : 0.5 * (a + b);
    if (!(c > a && c < b)) c = 0.5 * (a + b);
    const double fc = g(c);
    if (fc == 0.0) return c;
    if (sign_of(fc) == far_sign) {
      b = c;
      fb = fc;
      if (last_side == 1) fa *= 0.5;
      last_side = 1;
      if (std::abs(fb) <= ftol) break;
    } else {
      a = c;
      fa = fc;
      if (last_side == -1) fb *= 0.5;
      last_side = -1;
    }
  }
  return b;
}

std::optional<double> find_event(const DenseOutput& dense, const RootFn& root_fn,
                                 double t_lo, double t_hi) {
  Vector y;
  auto g = [&](double t) {
    dense.evaluate(t, y);
    return root_fn(t, y);
  };
  return locate(g, t_lo, t_hi, 0);
}

Integrator::Integrator(OdeSystem system, IntegratorConfig config)
    : config_(config) {
  if (!(config_.abs_tol > 0.0) || !(config_.rel_tol > 0.0))
    throw std::invalid_argument("tolerances must be positive");
  if (!(config_.max_step > 0.0)) throw std::invalid_argument("max_step must be positive");
  if (config_.initial_step) h_ = *config_.initial_step;
  set_system(std::move(system));
}

void Integrator::set_system(OdeSystem system) {
  if (system.state_dim <= 0) throw std::invalid_argument("state_dim must be positive");
  if (!system.rhs) throw std::invalid_argument("rhs is empty");
  system_ = std::move(system);
  const auto n = system_.state_dim;
  for (Vector* v : {&y_, &f_, &y_old_, &ytmp_, &ynew_, &err5_, &err3_}) v->setZero(n);
  for (Vector& k : k_) k.setZero(n);
  started_ = false;
  dense_ready_ = false;
  root_signs_.assign(system_.root_fns.size(), 0);
}

void Integrator::eval_rhs(double t, const Vector& y, Vector& out) {
  system_.rhs(t, y, out);
  ++n_rhs_;
}

void Integrator::set_root_functions(std::vector<RootFn> roots) {
  system_.root_fns = std::move(roots);
  if (started_) read_root_signs();
}

void Integrator::read_root_signs() {
  root_signs_.resize(system_.root_fns.size());
  for (std::size_t i = 0; i < system_.root_fns.size(); ++i)
    root_signs_[i] = sign_of(system_.root_fns[i](t_, y_));
}

void Integrator::reset(double t, const Vector& y) {
  if (y.size() != system_.state_dim)
    throw std::invalid_argument("state has wrong dimension");
  t_ = t;
  y_ = y;
  eval_rhs(t_, y_, f_);
  if (!f_.allFinite())
    throw IntegrationError("non-finite right-hand side", t_, y_);
  started_ = true;
  dense_ready_ = false;
  h_last_ = 0.0;
  read_root_signs();
}

double Integrator::initial_step() {
  // Hairer, Norsett & Wanner, "Solving ODEs I", section II.4.
  const auto sk = (config_.abs_tol + config_.rel_tol * y_.array().abs()).eval();
  const double n = static_cast<double>(y_.size());
  const double dnf = (f_.array() / sk).square().sum() / n;
  const double dny = (y_.array() / sk).square().sum() / n;
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
  h = std::min(h, config_.max_step);
  ytmp_ = y_ + h * f_;
  eval_rhs(t_ + h, ytmp_, k_[1]);
  const double der2 =
      std::sqrt(((k_[1] - f_).array() / sk).square().sum() / n) / h;
  const double der12 = std::max(der2, std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3)
                                   : std::pow(0.01 / der12, 1.0 / 8.0);
  return std::min({100.0 * h, h1, config_.max_step});
}

const StepResult& Integrator::step(double t_limit) {
  if (!started_) throw std::logic_error("integrator not initialised; call reset()");
  if (!(t_limit > t_)) throw std::invalid_argument("step limit must lie ahead");

  const std::uint64_t evals_before = n_rhs_;
  if (!(h_ > 0.0)) h_ = initial_step();

  bool rejected = false;
  double h = 0.0;
  bool hits_limit = false;
  k_[0] = f_;
  for (;;) {
    h = std::min(h_, config_.max_step);
    const double remaining = t_limit - t_;
    hits_limit = t_ + 1.01 * h >= t_limit;
    if (hits_limit) h = remaining;
    if (h < min_step(t_) && !hits_limit) {
      std::ostringstream msg;
      msg << "step size underflow (h = " << h << ") at t = " << t_;
      throw IntegrationError(msg.str(), t_, y_);
    }

    for (int s = 1; s < tab::kStages; ++s) {
      ytmp_ = y_;
      for (int j = 0; j < s; ++j)
        if (tab::a[s][j] != 0.0) ytmp_.noalias() += (h * tab::a[s][j]) * k_[j];
      eval_rhs(t_ + tab::c[s] * h, ytmp_, k_[s]);
    }
    ynew_ = y_;
    for (int j = 0; j < tab::kStages; ++j)
      if (tab::a[tab::kStages][j] != 0.0) ynew_.noalias() += (h * tab::a[tab::kStages][j]) * k_[j];
    eval_rhs(t_ + h, ynew_, k_[tab::kStages]);

    err5_.setZero();
    err3_.setZero();
    for (int j = 0; j <= tab::kStages; ++j) {
      if (tab::e5[j] != 0.0) err5_.noalias() += tab::e5[j] * k_[j];
      const double b = j < tab::kStages ? tab::a[tab::kStages][j] : 0.0;
      const double e3 = b - tab::e3_shift[j];
      if (e3 != 0.0) err3_.noalias() += e3 * k_[j];
    }
    double e5 = 0.0, e3 = 0.0;
    for (Eigen::Index i = 0; i < err5_.size(); ++i) {
      const double sc = config_.abs_tol +
                        config_.rel_tol * std::max(std::abs(y_[i]), std::abs(ynew_[i]));
      e5 = std::max(e5, std::abs(err5_[i]) / sc);
      e3 = std::max(e3, std::abs(err3_[i]) / sc);
    }
    // fifth-order estimate, damped by the third-order one where that is large
    const double denom = e5 * e5 + 0.01 * e3 * e3;
    const double err = denom > 0.0 ? h * e5 * e5 / std::sqrt(denom) : 0.0;
    if (!std::isfinite(err) || !k_[tab::kStages].allFinite() || !ynew_.allFinite()) {
      h_ = 0.2 * h;
      rejected = true;
      continue;
    }
    if (err <= 1.0) {
      const double fac_max = rejected ? 1.0 : 6.0;
      const double fac =
          err == 0.0 ? fac_max : std::clamp(0.9 * std::pow(err, -1.0 / 8.0), 0.333, fac_max);
      // A step shortened to land on t_limit should not shrink the proposal.
      h_ = hits_limit ? std::max(h_, h * fac) : h * fac;
      break;
    }
    h_ = h * std::max(0.333, 0.9 * std::pow(err, -1.0 / 8.0));
    rejected = true;
  }

  StepResult& r = result_;
  r.t_old = t_;
  r.t_new = hits_limit ? t_limit : t_ + h;
  h_last_ = h;
  dense_ready_ = false;
  y_old_ = y_;

  t_ = r.t_new;
  y_ = ynew_;
  f_ = k_[tab::kStages];
  r.state_new = y_;

  r.events.clear();
  for (std::size_t i = 0; i < system_.root_fns.size(); ++i) {
    const RootFn& fn = system_.root_fns[i];
    const int prev = root_signs_[i];
    const int now = sign_of(fn(t_, y_));
    if (prev != 0 && now != prev) {
      std::optional<double> te;
      const DenseOutput& dense = dense_output();
      if (now == 0) {
        te = t_;
      } else {
        Vector tmp;
        auto g = [&](double t) {
          dense.evaluate(t, tmp);
          return fn(t, tmp);
        };
        te = locate(g, r.t_old, r.t_new, prev);
      }
      Event ev;
      ev.root = i;
      ev.time = te.value_or(r.t_new);
      ev.state = ev.time == r.t_new ? y_ : dense(ev.time);
      ev.direction = -prev;
      r.events.push_back(std::move(ev));
    }
    root_signs_[i] = now != 0 ? now : -prev;
  }
  std::stable_sort(r.events.begin(), r.events.end(),
                   [](const Event& a, const Event& b) { return a.time < b.time; });
  r.n_rhs_evals = n_rhs_ - evals_before;
  return r;
}

const DenseOutput& Integrator::dense_output() {
  if (!(h_last_ > 0.0)) throw std::logic_error("no step has been taken since the last reset");
  if (!dense_ready_) build_dense();
  return dense_;
}

void Integrator::build_dense() {
  const double h = h_last_;
  const double t0 = t_ - h;
  for (int s = tab::kStages + 1; s < tab::kExtendedStages; ++s) {
    ytmp_ = y_old_;
    for (int j = 0; j < s; ++j)
      if (tab::a[s][j] != 0.0) ytmp_.noalias() += (h * tab::a[s][j]) * k_[j];
    eval_rhs(t0 + tab::c[s] * h, ytmp_, k_[s]);
  }
  dense_.t0_ = t0;
  dense_.h_ = h;
  dense_.y0_ = y_old_;
  const Vector dy = y_ - y_old_;
  dense_.coef_[0] = dy;
  dense_.coef_[1] = h * k_[0] - dy;
  dense_.coef_[2] = 2.0 * dy - h * (k_[tab::kStages] + k_[0]);
  for (int i = 0; i < 4; ++i) {
    Vector& c = dense_.coef_[static_cast<std::size_t>(3 + i)];
    c.setZero(dy.size());
    for (int j = 0; j < tab::kExtendedStages; ++j)
      if (tab::d[i][j] != 0.0) c.noalias() += (h * tab::d[i][j]) * k_[j];
  }
  dense_ready_ = true;
}

StopReason Integrator::integrate_until(double t_end, const EventHandler& on_event) {
  while (t_ < t_end) {
    const StepResult& r = step(t_end);
    if (r.events.empty()) continue;
    const Event ev = r.events.front();
    Vector state = ev.state;
    const EventAction action =
        on_event ? on_event(ev, state) : EventAction::kContinue;
    reset(ev.time, state);
    if (ev.root < root_signs_.size() && root_signs_[ev.root] == 0)
      root_signs_[ev.root] = ev.direction;
    if (action == EventAction::kStop) return StopReason::kHandler;
  }
  return StopReason::kHorizon;
}

}  // namespace grhmc::ode
