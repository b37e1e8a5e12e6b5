#include "grhmc/experiment.hpp"

#include "grhmc/report.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <mutex>
#include <ostream>
#include <thread>

namespace grhmc {

int ExperimentResult::failures() const {
  return static_cast<int>(std::count_if(replicas.begin(), replicas.end(),
                                        [](const ReplicaResult& r) { return !r.chain; }));
}

ReplicaResult run_replica(const ExperimentConfig& config, const TargetModel& target,
                          int replica) {
  ReplicaResult out;
  out.index = replica;
  const ProcessConfig pc = config.process_config(replica);
  out.seed = pc.seed;
  try {
    std::unique_ptr<ScaleTuner> tuner = make_tuner(config.method, config.mct);
    out.chain = simulate_chain(target, *tuner, pc, config.integrator);
    if (auto* mct = dynamic_cast<MctTuner*>(tuner.get())) out.mct_stages = mct->stages();
  } catch (const ChainError& e) {
    out.error = e.what();
    out.error_time = e.time;
    out.error_position = e.position;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const TargetModel target = build_target(config.target);
  ExperimentResult result;
  result.config = config;
  result.coordinate_names = coordinate_names(config.target, target);
  result.replicas.resize(static_cast<std::size_t>(config.replicas));

  int jobs = options.jobs > 0 ? options.jobs
                              : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min(jobs, config.replicas);
  std::atomic<int> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (int r = next++; r < config.replicas; r = next++) {
      ReplicaResult rr = run_replica(config, target, r);
      if (options.log) {
        std::lock_guard<std::mutex> lock(log_mutex);
        *options.log << "  " << config.name << " " << to_string(config.method) << " replica "
                     << r;
        if (rr.chain)
          *options.log << " done, N_ode = " << rr.chain->n_ode << "\n";
        else
          *options.log << " FAILED: " << rr.error << "\n";
      }
      result.replicas[static_cast<std::size_t>(r)] = std::move(rr);
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<ReplicaSummary> ok;
  for (const auto& r : result.replicas)
    if (r.chain) ok.push_back({r.chain->samples, r.chain->scaling.s, r.chain->n_ode});
  if (!ok.empty()) result.report = summarize(ok);

  if (options.write_outputs) write_experiment(result, config.output);
  return result;
}

std::vector<ExperimentResult> run_suite(const SuiteConfig& suite,
                                        const std::filesystem::path& root,
                                        const RunOptions& options) {
  std::vector<ExperimentResult> results;
  for (ExperimentConfig cfg : suite.experiments) {
    cfg.output = root / cfg.name / to_string(cfg.method);
    if (options.log) *options.log << cfg.name << " / " << to_string(cfg.method) << "\n";
    try {
      results.push_back(run_experiment(cfg, options));
    } catch (const std::exception& e) {
      ExperimentResult failed;
      failed.config = cfg;
      ReplicaResult r;
      r.error = e.what();
      failed.replicas.push_back(std::move(r));
      if (options.log) *options.log << "  FAILED: " << e.what() << "\n";
      results.push_back(std::move(failed));
    }
  }
  if (options.write_outputs) write_suite_tables(suite, results, root);
  return results;
}

}  // namespace grhmc
