// Acceptance run: one PASS/FAIL line per criterion, exit code 1 on any failure.

#include "grhmc/config.hpp"
#include "grhmc/diagnostics.hpp"
#include "grhmc/experiment.hpp"
#include "grhmc/p2.hpp"
#include "grhmc/process.hpp"
#include "grhmc/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace grhmc;

namespace {

const std::filesystem::path kRoot = GRHMC_SOURCE_DIR;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!ok) detail << " [failed: " << what << "]";
  }
};

int failures = 0;

void criterion(const std::string& id, const std::string& title, const std::function<void(Outcome&)>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    body(out);
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail << " exception: " << e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!out.pass) ++failures;
  std::printf("%s %-4s %s |%s (%.1f s)\n", out.pass ? "PASS" : "FAIL", id.c_str(), title.c_str(),
              out.detail.str().c_str(), secs);
  std::fflush(stdout);
}

const SuiteConfig& suite() {
  static const SuiteConfig s = load_suite(kRoot / "configs" / "suite.yaml");
  return s;
}

ExperimentConfig bundled(const std::string& name, Method method) {
  for (const auto& e : suite().experiments)
    if (e.name == name && e.method == method) return e;
  throw std::runtime_error("no bundled experiment " + name);
}

ExperimentConfig desk(const std::string& name, Method method) {
  ExperimentConfig c = bundled(name, method);
  c.apply(Preset::kDesk);
  return c;
}

// Final scaling after a single burn-in of length t_burn_scale = 6000.
Vector tuned_scale(const std::string& name, Method method) {
  ExperimentConfig c = bundled(name, method);
  c.replicas = 1;
  c.t_burn_scale = 6000.0;
  c.t_burn_lambda = 0.0;
  c.t_sample = 10.0;
  c.samples = 5;
  const ReplicaResult r = run_replica(c, build_target(c.target), 0);
  if (!r.chain) throw std::runtime_error(name + ": " + r.error);
  return r.chain->scaling.s;
}

void check_scale(Outcome& out, const std::string& label, const Vector& got, const Vector& want, double tol) {
  out.detail << " " << label << " S=(";
  for (Eigen::Index j = 0; j < got.size(); ++j) {
    const double rel = std::abs(got[j] / want[j] - 1.0);
    out.detail << (j ? ", " : "") << got[j];
    out.require(rel <= tol, label + " coordinate " + std::to_string(j + 1));
  }
  out.detail << ")";
}

ExperimentResult run(const ExperimentConfig& c) {
  ExperimentResult r = run_experiment(c, {1, false, nullptr});
  if (r.failures() > 0 || !r.report) throw std::runtime_error(c.name + ": replica failure");
  return r;
}

double min_efficiency(const ExperimentResult& r) {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& row : r.report->coordinates) lo = std::min(lo, row.efficiency);
  return lo;
}

Matrix ar1_chains(int n, int chains, double rho, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Matrix m(n, chains);
  const double innovation = std::sqrt(1.0 - rho * rho);
  for (int c = 0; c < chains; ++c) {
    double x = z(rng);
    for (int i = 0; i < n; ++i) {
      m(i, c) = x;
      x = rho * x + innovation * z(rng);
    }
  }
  return m;
}

const std::vector<Method> kMethods = {Method::kVari, Method::kIsg, Method::kMct};

}  // namespace

int main() {
  criterion("1", "energy conservation, standard normal d=2, T=100", [](Outcome& out) {
    // Stops shorten steps and flatter the drift, so the endpoint of an
    // uninterrupted run is checked as well.
    const TargetModel t = make_standard_normal(2);
    auto drift = [&](std::uint64_t seed) {
      Process p(t, {}, seed, 0.0);
      const double h0 = p.hamiltonian();
      double worst = 0.0;
      for (int i = 1; i <= 100; ++i) {
        p.advance(i);
        worst = std::max(worst, std::abs(p.hamiltonian() - h0));
      }
      Process straight(t, {}, seed, 0.0);
      straight.advance(100.0);
      return std::max(worst, std::abs(straight.hamiltonian() - h0));
    };
    const double worst = drift(suite().experiments.front().seed);
    int over = 0;
    for (std::uint64_t s = 1; s <= 200; ++s) over += drift(s) > 1e-5;
    out.detail << " max|H-H0|=" << worst << " (initial momenta over 1e-5 for " << over << "/200 seeds)";
    out.require(worst <= 1e-5, "drift");
  });

  criterion("2", "median crossings of the standard normal are pi apart", [](Outcome& out) {
    const TargetModel t = make_standard_normal(1);
    Process p(t, {}, 2, 0.0);
    p.enable_crossing_events(true);
    std::vector<double> times;
    Process::Hooks hooks;
    hooks.on_crossing = [&](Process& pr, int) { times.push_back(pr.time()); };
    p.advance(100.0, hooks);
    double worst = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i)
      worst = std::max(worst, std::abs(times[i] - times[i - 1] - std::numbers::pi));
    out.detail << " crossings=" << times.size() << " max|gap-pi|=" << worst;
    out.require(times.size() >= 30, "crossing count");
    out.require(worst <= 1e-5, "spacing");
  });

  criterion("3", "ISG fixed points", [](Outcome& out) {
    const double g3 = std::sqrt(1.0 - 0.95 * 0.95);
    Vector want(2);
    want << g3, g3;
    check_scale(out, "G3", tuned_scale("G3", Method::kIsg), want, 0.10);
    want << 1.0 / std::sqrt(5.0), 1.0;
    check_scale(out, "smiley", tuned_scale("NG2", Method::kIsg), want, 0.10);
    want << 1.0 / std::sqrt(3.0), std::exp(-1.0);
    check_scale(out, "funnel", tuned_scale("F2", Method::kIsg), want, 0.15);
  });

  criterion("4", "VARI fixed points", [](Outcome& out) {
    Vector want(2);
    want << std::sqrt(10.0), std::sqrt(1000.0);
    check_scale(out, "G2", tuned_scale("G2", Method::kVari), want, 0.10);
    want << std::sqrt(8.0), std::sqrt(18.0);
    check_scale(out, "NG1", tuned_scale("NG1", Method::kVari), want, 0.15);
  });

  criterion("5", "MCT on near-independent Gaussians", [](Outcome& out) {
    Vector want(2);
    want << std::sqrt(10.0), std::sqrt(1000.0);
    check_scale(out, "G2", tuned_scale("G2", Method::kMct), want, 0.15);
  });

  criterion("6", "P-square median of 1e5 standard normals", [](Outcome& out) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> z;
    std::vector<double> xs(100000);
    P2Quantile p2;
    for (double& x : xs) {
      x = z(rng);
      p2.insert(x);
    }
    std::nth_element(xs.begin(), xs.begin() + 50000, xs.end());
    const double hi = xs[50000];
    const double lo = *std::max_element(xs.begin(), xs.begin() + 50000);
    const double exact = 0.5 * (lo + hi);
    out.detail << " estimate=" << p2.estimate() << " sorted=" << exact;
    out.require(std::abs(p2.estimate() - exact) <= 0.02, "median");
  });

  criterion("7", "bulk ESS on AR(1) and iid chains", [](Outcome& out) {
    const double rho = 0.9;
    const double want = 40000.0 * (1 - rho) / (1 + rho);
    const double ar = bulk_ess(ar1_chains(10000, 4, rho, 7)).value;
    const double iid = bulk_ess(ar1_chains(10000, 4, 0.0, 8)).value / 40000.0;
    out.detail << " AR ESS=" << ar << " (want " << want << ") iid ESS/N=" << iid;
    out.require(std::abs(ar / want - 1.0) <= 0.2, "AR(1)");
    out.require(iid >= 0.9 && iid <= 1.1, "iid");
  });

  criterion("8", "stationarity on G1 with every method", [](Outcome& out) {
    const double mean[] = {1.0, 2.0}, sd[] = {2.0, 3.0};
    for (Method m : kMethods) {
      const ExperimentResult r = run(desk("G1", m));
      out.detail << " " << to_string(m) << ":";
      for (int j = 0; j < 2; ++j) {
        const CoordinateRow& row = r.report->coordinates[j];
        const double z = (row.mean - mean[j]) / row.mean_se;
        out.detail << " q" << j + 1 << " z=" << z << " sd=" << row.sd;
        out.require(std::abs(z) <= 3.0, to_string(m) + " mean q" + std::to_string(j + 1));
        out.require(std::abs(row.sd / sd[j] - 1.0) <= 0.05, to_string(m) + " sd q" + std::to_string(j + 1));
      }
    }
  });

  criterion("9", "funnel omega=2 efficiency ordering ISG > MCT > VARI", [](Outcome& out) {
    std::map<Method, double> eff;
    for (Method m : kMethods) {
      eff[m] = min_efficiency(run(desk("F2", m)));
      out.detail << " " << to_string(m) << "=" << eff[m];
    }
    out.require(eff[Method::kIsg] >= 5.0 * eff[Method::kVari], "ISG >= 5 VARI");
    out.require(eff[Method::kIsg] > eff[Method::kMct], "ISG > MCT");
    out.require(eff[Method::kMct] > eff[Method::kVari], "MCT > VARI");
  });

  criterion("10", "identical config and seed give identical tables", [](Outcome& out) {
    const ExperimentConfig c = desk("G1", Method::kMct);
    const ExperimentResult a = run_experiment(c, {1, false, nullptr});
    const ExperimentResult b = run_experiment(c, {1, false, nullptr});
    const ExperimentResult parallel = run_experiment(c, {2, false, nullptr});
    out.require(experiment_table_csv(a) == experiment_table_csv(b), "csv repeat");
    out.require(experiment_table_text(a) == experiment_table_text(b), "text repeat");
    out.require(experiment_table_csv(a) == experiment_table_csv(parallel), "csv with two workers");
    std::vector<const ExperimentResult*> ra = {&a}, rb = {&parallel};
    out.require(comparison_table_csv(ra, {"G1"}) == comparison_table_csv(rb, {"G1"}), "comparison csv");
    out.detail << " " << experiment_table_csv(a).size() << " bytes";
  });

  criterion("L1", "logistic gradients match finite differences", [](Outcome& out) {
    for (const char* name : {"BLR1", "BLR2"}) {
      const TargetModel t = build_target(bundled(name, Method::kVari).target);
      std::mt19937_64 rng(11);
      std::normal_distribution<double> z;
      double worst = 0.0;
      for (int k = 0; k < 100; ++k) {
        Vector q(t.dim());
        for (Eigen::Index j = 0; j < q.size(); ++j) q[j] = 0.5 * z(rng);
        const Vector g = t.eval(q).second;
        const Vector fd = finite_difference_gradient(t, q);
        worst = std::max(worst, (g - fd).cwiseAbs().maxCoeff() / std::max(1.0, g.cwiseAbs().maxCoeff()));
      }
      out.detail << " " << name << " max rel err=" << worst;
      out.require(worst <= 1e-5, name);
    }
  });

  criterion("L2", "logistic intercept posterior means agree across methods", [](Outcome& out) {
    for (const char* name : {"BLR1", "BLR2"}) {
      std::vector<std::pair<double, double>> est;
      for (Method m : kMethods) {
        const ExperimentResult r = run(desk(name, m));
        const CoordinateRow& row = r.report->coordinates[0];
        est.emplace_back(row.mean, row.mean_se);
      }
      out.detail << " " << name << ":";
      for (std::size_t a = 0; a < est.size(); ++a) {
        out.detail << " " << to_string(kMethods[a]) << "=" << est[a].first << "+-" << est[a].second;
        for (std::size_t b = a + 1; b < est.size(); ++b) {
          const double se = std::hypot(est[a].second, est[b].second);
          out.require(std::abs(est[a].first - est[b].first) <= 3.0 * se,
                      std::string(name) + " " + to_string(kMethods[a]) + " vs " + to_string(kMethods[b]));
        }
      }
    }
  });

  std::printf("%s: %d failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
