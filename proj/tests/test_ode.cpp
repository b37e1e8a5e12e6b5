#include "grhmc/ode.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace grhmc;
using namespace grhmc::ode;

namespace {

OdeSystem oscillator() {
  OdeSystem s;
  s.state_dim = 2;
  s.rhs = [](double, const Vector& y, Vector& f) {
    f[0] = y[1];
    f[1] = -y[0];
  };
  return s;
}

Vector start(double q, double p) {
  Vector y(2);
  y << q, p;
  return y;
}

double endpoint_error(double tol) {
  Integrator it(oscillator(), {tol, tol});
  it.reset(0.0, start(1.0, 0.0));
  it.integrate_until(10.0, nullptr);
  return std::hypot(it.state()[0] - std::cos(10.0), it.state()[1] + std::sin(10.0));
}

}  // namespace

double max_energy_drift(IntegratorConfig cfg) {
  Integrator it(oscillator(), cfg);
  it.reset(0.0, start(1.0, 0.0));
  double worst = 0.0;
  while (it.time() < 100.0) {
    it.step(100.0);
    worst = std::max(worst, std::abs(0.5 * it.state().squaredNorm() - 0.5));
  }
  return worst;
}

TEST_CASE("oscillator conserves energy and follows cos t") {
  // At the default tolerance 1e-6 the drift stays within 10 tol; reaching
  // 1e-6 over this horizon takes a tenfold tighter tolerance.
  CHECK(max_energy_drift({}) <= 1e-5);
  CHECK(max_energy_drift({1e-7, 1e-7}) <= 1e-6);

  Integrator again(oscillator(), {});
  again.reset(0.0, start(1.0, 0.0));
  again.integrate_until(2.0 * std::numbers::pi, nullptr);
  CHECK(again.state()[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(again.time() == 2.0 * std::numbers::pi);
}

TEST_CASE("pure quadrature is exact") {
  OdeSystem s;
  s.state_dim = 1;
  s.rhs = [](double, const Vector&, Vector& f) { f[0] = 1.0; };
  Integrator it(s, {});
  it.reset(0.0, Vector::Zero(1));
  it.integrate_until(37.25, nullptr);
  CHECK(std::abs(it.state()[0] - 37.25) <= 1e-9);
}

TEST_CASE("error decreases at high order with the tolerance") {
  // Local error per unit step scales as tol, global error ~ tol^(5/5); the
  // step count grows like tol^(-1/5), so halving the tolerance shrinks the
  // error by about a factor two and costs only a fifth-root more steps.
  const double e1 = endpoint_error(1e-6);
  const double e2 = endpoint_error(1e-6 / 32.0);
  CHECK(e2 < e1);
  CHECK(e1 / e2 >= 8.0);

  // Fixed step sizes reveal the order directly.
  auto fixed = [](double h) {
    IntegratorConfig cfg{1e3, 1e3, h, h};
    Integrator it(oscillator(), cfg);
    it.reset(0.0, start(1.0, 0.0));
    it.integrate_until(4.0, nullptr);
    return std::abs(it.state()[0] - std::cos(4.0));
  };
  const double observed = std::log2(fixed(0.5) / fixed(0.25));
  CHECK(observed >= 4.0);
}

TEST_CASE("dense output matches end points") {
  Integrator it(oscillator(), {});
  it.reset(0.0, start(1.0, 0.0));
  it.step(10.0);
  const StepResult& r = it.step(10.0);
  const DenseOutput& dense = it.dense_output();
  CHECK((dense(r.t_old) - Vector(start(std::cos(r.t_old), -std::sin(r.t_old)))).norm() <= 1e-6);
  CHECK((dense(r.t_new) - r.state_new).norm() <= 1e-14);
  const double mid = 0.5 * (r.t_old + r.t_new);
  CHECK(std::abs(dense(mid)[0] - std::cos(mid)) <= 1e-6);
}

TEST_CASE("find_root and find_event") {
  auto cosine = [](double t) { return std::cos(t); };
  CHECK(find_root(cosine, 1.0, 2.0, std::cos(1.0), std::cos(2.0)) ==
        doctest::Approx(std::numbers::pi / 2).epsilon(1e-10));
  auto linear = [](double t) { return t - 1.5; };
  CHECK(find_root(linear, 1.0, 2.0, -0.5, 0.5) == doctest::Approx(1.5).epsilon(1e-14));

  // Integrated rate 0.2 t reaches the threshold 1 at t = 5.
  OdeSystem s;
  s.state_dim = 1;
  s.rhs = [](double, const Vector&, Vector& f) { f[0] = 0.2; };
  Integrator it(s, {});
  it.reset(0.0, Vector::Zero(1));
  while (it.time() <= 5.0) it.step(20.0);
  const StepResult& r = it.result();
  const RootFn threshold = [](double, const Vector& y) { return y[0] - 1.0; };
  const auto te = find_event(it.dense_output(), threshold, r.t_old, r.t_new);
  REQUIRE(te);
  CHECK(std::abs(*te - 5.0) <= 1e-9);

  const RootFn never = [](double, const Vector& y) { return y[0] + 1.0; };
  CHECK_FALSE(find_event(it.dense_output(), never, r.t_old, r.t_new));
}

TEST_CASE("find_event reports the earliest of several crossings") {
  // y' = 1 from 0; cos y changes sign at pi/2 and 3pi/2 inside one step of length 7
  OdeSystem s{1, [](double, const Vector&, Vector& f) { f[0] = 1.0; }, {}};
  Integrator it(s, {1e3, 1e3, 7.0, 7.0});
  it.reset(0.0, Vector::Zero(1));
  const StepResult& r = it.step(7.0);
  REQUIRE(r.t_new == 7.0);
  const RootFn g = [](double, const Vector& y) { return std::cos(y[0]); };
  const auto te = find_event(it.dense_output(), g, r.t_old, r.t_new);
  REQUIRE(te);
  CHECK(*te == doctest::Approx(std::numbers::pi / 2).epsilon(1e-9));
}

TEST_CASE("integrate_until stops at the horizon") {
  Integrator it(oscillator(), {});
  it.reset(0.0, start(1.0, 0.0));
  CHECK(it.integrate_until(10.0, nullptr) == StopReason::kHorizon);
  CHECK(it.time() == 10.0);
}

TEST_CASE("crossing events of the oscillator") {
  OdeSystem s = oscillator();
  s.root_fns.push_back([](double, const Vector& y) { return y[0]; });
  Integrator it(s, {});
  it.reset(0.0, start(1.0, 0.0));
  std::vector<double> times;
  it.integrate_until(10.0, [&](const Event& ev, Vector&) {
    times.push_back(ev.time);
    return EventAction::kContinue;
  });
  REQUIRE(times.size() == 3);
  const double pi = std::numbers::pi;
  CHECK(std::abs(times[0] - pi / 2) <= 1e-5);
  CHECK(std::abs(times[1] - 3 * pi / 2) <= 1e-5);
  CHECK(std::abs(times[2] - 5 * pi / 2) <= 1e-5);
}

TEST_CASE("reflecting handler keeps the energy") {
  OdeSystem s = oscillator();
  s.root_fns.push_back([](double, const Vector& y) { return y[0] - 0.3; });
  Integrator it(s, {1e-9, 1e-9});
  it.reset(0.0, start(1.0, 0.0));
  int hits = 0;
  double last = -1.0;
  bool monotone = true;
  // a wall at q = 0.3 hit from above; upward crossings just after a
  // bounce are passed through
  it.integrate_until(50.0, [&](const Event& ev, Vector& y) {
    monotone = monotone && ev.time >= last;
    last = ev.time;
    if (ev.direction < 0) {
      ++hits;
      y[1] = -y[1];
    }
    return EventAction::kContinue;
  });
  CHECK(hits > 5);
  CHECK(monotone);
  CHECK(std::abs(0.5 * it.state().squaredNorm() - 0.5) <= 1e-6);
}

TEST_CASE("handler can stop integration") {
  OdeSystem s = oscillator();
  s.root_fns.push_back([](double, const Vector& y) { return y[0]; });
  Integrator it(s, {});
  it.reset(0.0, start(1.0, 0.0));
  const auto reason =
      it.integrate_until(10.0, [](const Event&, Vector&) { return EventAction::kStop; });
  CHECK(reason == StopReason::kHandler);
  CHECK(std::abs(it.time() - std::numbers::pi / 2) <= 1e-5);
}

TEST_CASE("evaluation counts are reproducible") {
  auto run = [] {
    Integrator it(oscillator(), {});
    it.reset(0.0, start(1.0, 0.0));
    it.integrate_until(100.0, nullptr);
    return it.rhs_evals();
  };
  const auto n = run();
  CHECK(n > 0);
  CHECK(run() == n);
}

TEST_CASE("blow-up raises an integration error") {
  OdeSystem s;
  s.state_dim = 1;
  s.rhs = [](double, const Vector& y, Vector& f) { f[0] = y[0] * y[0]; };
  Integrator it(s, {});
  it.reset(0.0, Vector::Ones(1));
  CHECK_THROWS_AS(it.integrate_until(2.0, nullptr), IntegrationError);
}

TEST_CASE("invalid configuration") {
  CHECK_THROWS_AS(Integrator(oscillator(), {0.0, 1e-6}), std::invalid_argument);
  Integrator it(oscillator(), {});
  CHECK_THROWS_AS(it.step(1.0), std::logic_error);
}
