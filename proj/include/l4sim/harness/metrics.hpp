#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace l4sim {

struct FlowMetrics {
  double throughput_mbps = 0.0;
  double mean_rtt_ms = 0.0;
  double mean_qdelay_ms = 0.0;
  double p99_qdelay_ms = 0.0;
  double marks = 0.0;
  double drops = 0.0;
  double share = 0.0;
};

struct TrialResult {
  std::uint64_t seed = 0;
  std::vector<FlowMetrics> flows;
};

struct ScenarioResult {
  std::vector<std::uint64_t> seeds;
  std::vector<TrialResult> trials;
  std::vector<FlowMetrics> mean;
  std::vector<FlowMetrics> stddev;
};

// Jain's fairness index: (sum x)^2 / (n * sum x^2).
inline double jain_index(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("jain_index: empty input");
  double sum = 0.0, sq = 0.0;
  for (double x : xs) {
    if (x < 0.0) throw std::invalid_argument("jain_index: negative throughput");
    sum += x;
    sq += x * x;
  }
  if (sq == 0.0) throw std::invalid_argument("jain_index: all-zero input");
  return sum * sum / (static_cast<double>(xs.size()) * sq);
}

namespace detail {

template <typename Field>
void mean_std(std::span<const TrialResult> trials, std::size_t flow, Field field, double& mean, double& sd) {
  const double n = static_cast<double>(trials.size());
  double sum = 0.0;
  for (const auto& t : trials) sum += field(t.flows.at(flow));
  mean = sum / n;
  if (trials.size() < 2) {
    sd = 0.0;
    return;
  }
  double ss = 0.0;
  for (const auto& t : trials) {
    const double d = field(t.flows.at(flow)) - mean;
    ss += d * d;
  }
  sd = std::sqrt(ss / (n - 1.0));
}

}  // namespace detail

// Arithmetic mean and sample standard deviation per flow and metric.
inline ScenarioResult aggregate(std::vector<TrialResult> trials) {
  if (trials.empty()) throw std::invalid_argument("aggregate: no trials");
  ScenarioResult r;
  const std::size_t nflows = trials.front().flows.size();
  for (const auto& t : trials) {
    if (t.flows.size() != nflows) throw std::invalid_argument("aggregate: inconsistent flow count");
    r.seeds.push_back(t.seed);
  }
  r.mean.resize(nflows);
  r.stddev.resize(nflows);
  for (std::size_t f = 0; f < nflows; ++f) {
    auto& m = r.mean[f];
    auto& s = r.stddev[f];
    detail::mean_std(trials, f, [](const FlowMetrics& x) { return x.throughput_mbps; }, m.throughput_mbps, s.throughput_mbps);
    detail::mean_std(trials, f, [](const FlowMetrics& x) { return x.mean_rtt_ms; }, m.mean_rtt_ms, s.mean_rtt_ms);
    detail::mean_std(trials, f, [](const FlowMetrics& x) { return x.mean_qdelay_ms; }, m.mean_qdelay_ms, s.mean_qdelay_ms);
    detail::mean_std(trials, f, [](const FlowMetrics& x) { return x.p99_qdelay_ms; }, m.p99_qdelay_ms, s.p99_qdelay_ms);
    detail::mean_std(trials, f, [](const FlowMetrics& x) { return x.marks; }, m.marks, s.marks);
    detail::mean_std(trials, f, [](const FlowMetrics& x) { return x.drops; }, m.drops, s.drops);
    detail::mean_std(trials, f, [](const FlowMetrics& x) { return x.share; }, m.share, s.share);
  }
  r.trials = std::move(trials);
  return r;
}

// Fills `share` from throughputs so that shares sum to one.
inline void assign_shares(std::vector<FlowMetrics>& flows) {
  double total = 0.0;
  for (const auto& f : flows) total += f.throughput_mbps;
  for (auto& f : flows) f.share = total > 0.0 ? f.throughput_mbps / total : 1.0 / static_cast<double>(flows.size());
}

}  // namespace l4sim
