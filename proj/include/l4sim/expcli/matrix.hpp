#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "l4sim/expcli/config.hpp"
#include "l4sim/expcli/csv.hpp"
#include "l4sim/harness/runner.hpp"

namespace l4sim::expcli {

struct Cell {
  std::string id;
  Scenario scenario;
};

inline std::string buffer_tag(double bdp) {
  std::string s = format_number(bdp);
  for (auto& c : s)
    if (c == '.') c = 'p';
  return s;
}

inline Scenario base_scenario(const MatrixConfig& cfg) {
  Scenario s;
  s.bottleneck_rate_bps = cfg.base.bottleneck_rate_bps;
  s.access_rate_bps = cfg.base.access_rate_bps;
  s.base_rtt = cfg.base.base_rtt;
  s.duration = cfg.base.duration;
  s.queue = cfg.base.queue;
  s.trials = cfg.trials;
  for (std::uint32_t i = 1; i <= cfg.trials; ++i) s.seeds.push_back(cfg.seed_base + i);
  if (cfg.timeseries) s.sample_period = cfg.sample_period;
  return s;
}

// Grid cells in (queue, buffer, fallback, opponent) order, then explicit runs.
inline std::vector<Cell> expand_cells(const MatrixConfig& cfg) {
  std::vector<Cell> cells;
  const Scenario base = base_scenario(cfg);
  if (cfg.grid) {
    for (auto q : cfg.grid->queues)
      for (double b : cfg.grid->buffers_bdp)
        for (bool fb : cfg.grid->prague_fallback)
          for (const auto& opp : cfg.grid->opponents) {
            Cell c;
            c.scenario = base;
            c.scenario.queue.kind = q;
            c.scenario.buffer_bdp = b;
            c.scenario.flows = {FlowSpec::prague(fb), opp};
            c.id = std::string(aqm::to_string(q)) + "_b" + buffer_tag(b) + "_" + c.scenario.flows[0].label() + "_vs_" +
                   opp.label();
            c.scenario.id = c.id;
            cells.push_back(std::move(c));
          }
  }
  for (const auto& r : cfg.runs) {
    Cell c;
    c.scenario = base;
    c.scenario.queue.kind = r.queue;
    c.scenario.buffer_bdp = r.buffer_bdp;
    c.scenario.flows = r.flows;
    if (r.base_rtt) c.scenario.base_rtt = *r.base_rtt;
    if (r.ecn_threshold) c.scenario.queue.ecn_threshold = *r.ecn_threshold;
    c.id = r.id;
    c.scenario.id = r.id;
    cells.push_back(std::move(c));
  }
  for (const auto& c : cells) {
    try {
      c.scenario.validate();
    } catch (const ScenarioError& e) {
      throw ConfigError("scenario " + c.id + ": " + e.what());
    }
  }
  return cells;
}

inline ResultRow make_row(const Cell& c, const std::string& seed, const std::vector<FlowMetrics>& m) {
  const auto& s = c.scenario;
  ResultRow r;
  r.scenario = c.id;
  r.queue = std::string(aqm::to_string(s.queue.kind));
  r.buffer_bdp = s.buffer_bdp;
  const auto& a = s.flows.at(0);
  r.flow_a_cc = std::string(to_string(a.cc));
  r.flow_a_ecn = std::string(to_string(a.ecn_mode));
  r.flow_a_fallback = a.fallback ? "on" : "off";
  r.seed = seed;
  r.throughput_a = m.at(0).throughput_mbps;
  r.share_a = m.at(0).share;
  r.qdelay_a_ms = m.at(0).mean_qdelay_ms;
  r.rtt_a_ms = m.at(0).mean_rtt_ms;
  r.marks = m.at(0).marks;
  r.drops = m.at(0).drops;
  if (s.flows.size() > 1) {
    const auto& b = s.flows[1];
    r.flow_b_cc = std::string(to_string(b.cc));
    r.flow_b_ecn = std::string(to_string(b.ecn_mode));
    r.throughput_b = m.at(1).throughput_mbps;
    r.qdelay_b_ms = m.at(1).mean_qdelay_ms;
    r.rtt_b_ms = m.at(1).mean_rtt_ms;
    r.marks += m.at(1).marks;
    r.drops += m.at(1).drops;
  } else {
    r.flow_b_cc = "none";
    r.flow_b_ecn = "off";
  }
  return r;
}

// Per-trial rows followed by the mean and std rows.
inline std::vector<ResultRow> rows_for(const Cell& c, const ScenarioResult& res) {
  std::vector<ResultRow> rows;
  for (const auto& t : res.trials) rows.push_back(make_row(c, std::to_string(t.seed), t.flows));
  rows.push_back(make_row(c, "mean", res.mean));
  rows.push_back(make_row(c, "std", res.stddev));
  return rows;
}

inline void write_timeseries(const std::filesystem::path& dir, const std::string& cell_id, std::uint64_t seed,
                             const std::vector<TimeseriesSample>& samples, std::size_t flows) {
  std::filesystem::create_directories(dir);
  for (std::size_t f = 0; f < flows; ++f) {
    std::ofstream os(dir / (cell_id + "_seed" + std::to_string(seed) + "_flow" + std::to_string(f) + ".csv"));
    os << "t_s,throughput_mbps,srtt_ms,qdelay_ms\n";
    for (const auto& s : samples) {
      if (s.flow != f) continue;
      os << format_number(s.t.seconds()) << ',' << format_number(s.throughput_mbps) << ','
         << format_number(s.srtt_ms) << ',' << format_number(s.qdelay_ms) << '\n';
    }
  }
}

struct MatrixOutcome {
  std::vector<ResultRow> rows;
  std::size_t cells = 0;
  std::size_t failed_trials = 0;
  std::vector<std::string> failures;
};

// Runs every (cell, seed) job on the worker pool. Output is ordered by cell and
// seed, independent of the number of workers. Failed trials are reported and
// their cells skipped.
inline MatrixOutcome run_matrix(const MatrixConfig& cfg, const std::filesystem::path& out_dir,
                                const std::function<void(const std::string&)>& log = {}) {
  const auto cells = expand_cells(cfg);
  struct Job {
    std::size_t cell;
    std::size_t trial;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (std::size_t t = 0; t < cells[c].scenario.seeds.size(); ++t) jobs.push_back({c, t});

  std::vector<std::vector<TrialResult>> results(cells.size());
  std::vector<std::vector<char>> ok(cells.size());
  std::vector<std::vector<std::string>> errors(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    results[c].resize(cells[c].scenario.seeds.size());
    ok[c].assign(cells[c].scenario.seeds.size(), 0);
    errors[c].resize(cells[c].scenario.seeds.size());
  }
  const auto ts_dir = out_dir / "timeseries";
  std::mutex io_mu;

  parallel_for(jobs.size(), cfg.jobs, [&](std::size_t i) {
    const auto [c, t] = jobs[i];
    const Cell& cell = cells[c];
    const auto seed = cell.scenario.seeds[t];
    try {
      auto out = run_trial_full(cell.scenario, seed);
      results[c][t] = std::move(out.result);
      ok[c][t] = 1;
      if (cfg.timeseries) {
        std::lock_guard lock(io_mu);
        write_timeseries(ts_dir, cell.id, seed, out.timeseries, cell.scenario.flows.size());
      }
    } catch (const std::exception& e) {
      errors[c][t] = e.what();
    }
    if (log) {
      std::lock_guard lock(io_mu);
      log(cell.id + " seed " + std::to_string(seed) + (ok[c][t] ? " done" : " FAILED"));
    }
  });

  MatrixOutcome outcome;
  outcome.cells = cells.size();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    bool cell_ok = true;
    for (std::size_t t = 0; t < ok[c].size(); ++t) {
      if (ok[c][t]) continue;
      cell_ok = false;
      ++outcome.failed_trials;
      outcome.failures.push_back(cells[c].id + " seed " + std::to_string(cells[c].scenario.seeds[t]) + ": " +
                                 errors[c][t]);
    }
    if (!cell_ok) continue;
    const auto res = aggregate(results[c]);
    for (auto& r : rows_for(cells[c], res)) outcome.rows.push_back(std::move(r));
  }

  std::filesystem::create_directories(out_dir);
  std::ofstream os(out_dir / "results.csv");
  write_header(os);
  for (const auto& r : outcome.rows) write_row(os, r);
  return outcome;
}

}  // namespace l4sim::expcli
