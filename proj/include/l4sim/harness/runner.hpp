#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "l4sim/harness/dumbbell.hpp"

namespace l4sim {

struct TrialOutput {
  TrialResult result;
  std::vector<TimeseriesSample> timeseries;
};

inline TrialOutput run_trial_full(const Scenario& s, std::uint64_t seed) {
  Dumbbell sim(s, seed);
  sim.run(s.duration);
  TrialOutput out;
  out.result.seed = seed;
  out.result.flows = sim.metrics();
  out.timeseries = sim.timeseries();
  return out;
}

inline TrialResult run_trial(const Scenario& s, std::uint64_t seed) { return run_trial_full(s, seed).result; }

// Runs `count` independent jobs on up to `workers` threads. Results are stored
// by job index, so the outcome does not depend on the worker count. The first
// exception thrown by any job is rethrown after all workers finish.
template <typename Job>
void parallel_for(std::size_t count, unsigned workers, Job&& job) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

inline ScenarioResult run_scenario(const Scenario& s, unsigned workers = 1) {
  s.validate();
  const auto seeds = s.seed_list();
  std::vector<TrialResult> trials(seeds.size());
  parallel_for(seeds.size(), workers, [&](std::size_t i) { trials[i] = run_trial(s, seeds[i]); });
  return aggregate(std::move(trials));
}

}  // namespace l4sim
