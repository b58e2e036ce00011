#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "l4sim/harness/scenario.hpp"

namespace l4sim::expcli {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, int line = -1, int column = -1)
      : std::runtime_error(format(msg, line, column)), line_(line), column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  static std::string format(const std::string& msg, int line, int column) {
    if (line < 0) return msg;
    std::ostringstream os;
    os << "line " << line + 1 << ", column " << column + 1 << ": " << msg;
    return os.str();
  }
  int line_;
  int column_;
};

// Network and queue settings shared by every cell unless a run overrides them.
struct BaseSettings {
  std::uint64_t bottleneck_rate_bps = 100'000'000;
  std::uint64_t access_rate_bps = 1'000'000'000;
  SimTime base_rtt = SimTime::ms(10);
  SimTime duration = SimTime::sec(60);
  aqm::QueueConfig queue;
};

struct GridSpec {
  std::vector<aqm::QueueKind> queues;
  std::vector<double> buffers_bdp;
  std::vector<FlowSpec> opponents;
  std::vector<bool> prague_fallback;
};

// One explicitly listed scenario (e.g. the single-flow Fig. 1 runs).
struct RunSpec {
  std::string id;
  aqm::QueueKind queue = aqm::QueueKind::Fifo;
  double buffer_bdp = 1.0;
  std::vector<FlowSpec> flows;
  std::optional<SimTime> base_rtt;
  std::optional<SimTime> ecn_threshold;
};

struct MatrixConfig {
  std::string name = "matrix";
  std::uint32_t trials = 10;
  unsigned jobs = 1;
  std::uint64_t seed_base = 0;
  std::string out_dir;
  bool timeseries = false;
  SimTime sample_period = SimTime::ms(100);
  BaseSettings base;
  std::optional<GridSpec> grid;
  std::vector<RunSpec> runs;
};

namespace detail {

inline ConfigError error_at(const YAML::Node& n, const std::string& msg) {
  const auto m = n.Mark();
  if (m.is_null()) return ConfigError(msg);
  return ConfigError(msg, m.line, m.column);
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) throw error_at(n, what + ": expected a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw error_at(n, what + ": invalid value '" + n.Scalar() + "'");
  }
}

inline double positive(const YAML::Node& n, const std::string& what) {
  const double v = scalar<double>(n, what);
  if (!(v > 0.0)) throw error_at(n, what + " must be > 0");
  return v;
}

inline SimTime millis(const YAML::Node& n, const std::string& what) {
  return SimTime::from_ms(positive(n, what));
}

inline aqm::QueueKind queue_kind(const YAML::Node& n) {
  const auto s = scalar<std::string>(n, "queue");
  if (auto k = aqm::parse_queue_kind(s)) return *k;
  throw error_at(n, "unknown queue '" + s + "'");
}

inline FlowSpec flow(const YAML::Node& n) {
  const auto s = scalar<std::string>(n, "flow");
  if (auto f = parse_flow_label(s)) return *f;
  throw error_at(n, "unknown flow '" + s + "'");
}

inline bool on_off(const YAML::Node& n) {
  const auto s = scalar<std::string>(n, "prague_fallback");
  if (s == "on" || s == "true") return true;
  if (s == "off" || s == "false") return false;
  throw error_at(n, "prague_fallback entries must be on or off");
}

template <typename F>
auto list(const YAML::Node& n, const std::string& what, F&& item) {
  if (!n.IsSequence()) throw error_at(n, what + ": expected a list");
  std::vector<decltype(item(n))> out;
  for (const auto& e : n) out.push_back(item(e));
  if (out.empty()) throw error_at(n, what + ": list is empty");
  return out;
}

inline void check_keys(const YAML::Node& map, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!map.IsMap()) throw error_at(map, where + ": expected a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw error_at(kv.first, "unknown key '" + key + "' in " + where);
  }
}

inline void parse_queue_params(const YAML::Node& n, aqm::QueueConfig& q) {
  check_keys(n, {"ecn_threshold_ms", "codel_target_ms", "codel_interval_ms", "fq_quantum", "dualpi2"}, "queue_params");
  if (n["ecn_threshold_ms"]) q.ecn_threshold = millis(n["ecn_threshold_ms"], "ecn_threshold_ms");
  if (n["codel_target_ms"]) q.codel_target = millis(n["codel_target_ms"], "codel_target_ms");
  if (n["codel_interval_ms"]) q.codel_interval = millis(n["codel_interval_ms"], "codel_interval_ms");
  if (n["fq_quantum"]) q.fq_quantum = scalar<std::uint32_t>(n["fq_quantum"], "fq_quantum");
  if (const auto d = n["dualpi2"]) {
    check_keys(d, {"target_ms", "step_thresh_ms", "t_update_ms", "alpha", "beta", "k", "tshift_ms"}, "dualpi2");
    auto& c = q.dualpi2;
    if (d["target_ms"]) c.pi_target = millis(d["target_ms"], "target_ms");
    if (d["step_thresh_ms"]) c.step_thresh = millis(d["step_thresh_ms"], "step_thresh_ms");
    if (d["t_update_ms"]) c.t_update = millis(d["t_update_ms"], "t_update_ms");
    if (d["alpha"]) c.alpha = positive(d["alpha"], "alpha");
    if (d["beta"]) c.beta = positive(d["beta"], "beta");
    if (d["k"]) c.k = positive(d["k"], "k");
    if (d["tshift_ms"]) c.tshift = millis(d["tshift_ms"], "tshift_ms");
  }
  try {
    q.validate();
  } catch (const std::invalid_argument& e) {
    throw error_at(n, e.what());
  }
}

}  // namespace detail

inline MatrixConfig parse_matrix_config(const YAML::Node& root) {
  using namespace detail;
  check_keys(root, {"name", "trials", "jobs", "seed_base", "out_dir", "timeseries", "sample_period_ms", "network",
                    "duration_s", "queue_params", "grid", "runs"},
             "config");
  MatrixConfig cfg;
  if (root["name"]) cfg.name = scalar<std::string>(root["name"], "name");
  if (root["trials"]) {
    const auto t = scalar<int>(root["trials"], "trials");
    if (t < 1) throw error_at(root["trials"], "trials must be >= 1");
    cfg.trials = static_cast<std::uint32_t>(t);
  }
  if (root["jobs"]) {
    const auto j = scalar<int>(root["jobs"], "jobs");
    if (j < 1) throw error_at(root["jobs"], "jobs must be >= 1");
    cfg.jobs = static_cast<unsigned>(j);
  }
  if (root["seed_base"]) cfg.seed_base = scalar<std::uint64_t>(root["seed_base"], "seed_base");
  if (root["out_dir"]) cfg.out_dir = scalar<std::string>(root["out_dir"], "out_dir");
  if (root["timeseries"]) cfg.timeseries = scalar<bool>(root["timeseries"], "timeseries");
  if (root["sample_period_ms"]) cfg.sample_period = millis(root["sample_period_ms"], "sample_period_ms");
  if (root["duration_s"]) cfg.base.duration = SimTime::from_seconds(positive(root["duration_s"], "duration_s"));
  if (const auto net = root["network"]) {
    check_keys(net, {"bottleneck_mbps", "access_mbps", "base_rtt_ms"}, "network");
    if (net["bottleneck_mbps"])
      cfg.base.bottleneck_rate_bps = static_cast<std::uint64_t>(positive(net["bottleneck_mbps"], "bottleneck_mbps") * 1e6);
    if (net["access_mbps"])
      cfg.base.access_rate_bps = static_cast<std::uint64_t>(positive(net["access_mbps"], "access_mbps") * 1e6);
    if (net["base_rtt_ms"]) cfg.base.base_rtt = millis(net["base_rtt_ms"], "base_rtt_ms");
  }
  if (const auto qp = root["queue_params"]) parse_queue_params(qp, cfg.base.queue);

  if (const auto g = root["grid"]) {
    check_keys(g, {"queues", "buffers_bdp", "opponents", "prague_fallback"}, "grid");
    GridSpec grid;
    if (!g["queues"] || !g["buffers_bdp"] || !g["opponents"])
      throw error_at(g, "grid needs queues, buffers_bdp and opponents");
    grid.queues = list(g["queues"], "queues", queue_kind);
    grid.buffers_bdp = list(g["buffers_bdp"], "buffers_bdp", [](const YAML::Node& n) { return positive(n, "buffers_bdp"); });
    grid.opponents = list(g["opponents"], "opponents", flow);
    for (std::size_t i = 0; i < grid.opponents.size(); ++i)
      if (grid.opponents[i].cc == CcKind::Prague) throw error_at(g["opponents"][i], "opponent must be a classic flow");
    grid.prague_fallback = g["prague_fallback"] ? list(g["prague_fallback"], "prague_fallback", on_off)
                                                : std::vector<bool>{false};
    cfg.grid = std::move(grid);
  }

  if (const auto rs = root["runs"]) {
    if (!rs.IsSequence()) throw error_at(rs, "runs: expected a list");
    for (const auto& r : rs) {
      check_keys(r, {"id", "queue", "buffer_bdp", "flows", "base_rtt_ms", "ecn_threshold_ms"}, "run");
      RunSpec run;
      if (!r["id"] || !r["queue"] || !r["flows"]) throw error_at(r, "run needs id, queue and flows");
      run.id = scalar<std::string>(r["id"], "id");
      run.queue = queue_kind(r["queue"]);
      if (r["buffer_bdp"]) run.buffer_bdp = positive(r["buffer_bdp"], "buffer_bdp");
      run.flows = list(r["flows"], "flows", flow);
      if (run.flows.size() > 2) throw error_at(r["flows"], "a run has one or two flows");
      if (r["base_rtt_ms"]) run.base_rtt = millis(r["base_rtt_ms"], "base_rtt_ms");
      if (r["ecn_threshold_ms"]) run.ecn_threshold = millis(r["ecn_threshold_ms"], "ecn_threshold_ms");
      cfg.runs.push_back(std::move(run));
    }
  }
  if (!cfg.grid && cfg.runs.empty()) throw ConfigError("config defines neither a grid nor runs");
  return cfg;
}

inline MatrixConfig parse_matrix_config_text(const std::string& text) {
  try {
    return parse_matrix_config(YAML::Load(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line, e.mark.column);
  }
}

inline MatrixConfig load_matrix_config(const std::string& path) {
  try {
    return parse_matrix_config(YAML::LoadFile(path));
  } catch (const YAML::BadFile&) {
    throw ConfigError("cannot read config file '" + path + "'");
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line, e.mark.column);
  }
}

// Built-in replication grid: every queue, buffer multiple and opponent, with
// Prague's fallback switched off and on.
inline MatrixConfig paper_replication_config() {
  MatrixConfig cfg;
  cfg.name = "paper-replication";
  GridSpec g;
  g.queues = {aqm::QueueKind::Fifo, aqm::QueueKind::FifoEcn, aqm::QueueKind::Codel,
              aqm::QueueKind::Fq,   aqm::QueueKind::FqCodel, aqm::QueueKind::DualPi2};
  g.buffers_bdp = {0.5, 1, 2, 4, 8};
  g.opponents = {FlowSpec::make(CcKind::Cubic, EcnMode::Off), FlowSpec::make(CcKind::Cubic, EcnMode::Classic),
                 FlowSpec::make(CcKind::BbrV1, EcnMode::Off), FlowSpec::make(CcKind::BbrV2, EcnMode::Off),
                 FlowSpec::make(CcKind::BbrV2, EcnMode::Classic), FlowSpec::make(CcKind::BbrV2, EcnMode::AccEcnL4S)};
  g.prague_fallback = {false, true};
  cfg.grid = std::move(g);
  return cfg;
}

}  // namespace l4sim::expcli
