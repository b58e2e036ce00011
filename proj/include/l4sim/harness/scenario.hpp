#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "l4sim/aqm/queue_discipline.hpp"
#include "l4sim/cc/bbr.hpp"
#include "l4sim/cc/cubic.hpp"
#include "l4sim/cc/prague.hpp"
#include "l4sim/cc/reno.hpp"

namespace l4sim {

enum class CcKind : std::uint8_t { Reno, Cubic, Prague, BbrV1, BbrV2 };
enum class EcnMode : std::uint8_t { Off, Classic, AccEcnL4S };

constexpr std::string_view to_string(CcKind k) {
  switch (k) {
    case CcKind::Reno: return "reno";
    case CcKind::Cubic: return "cubic";
    case CcKind::Prague: return "prague";
    case CcKind::BbrV1: return "bbr1";
    case CcKind::BbrV2: return "bbr2";
  }
  return "?";
}

constexpr std::string_view to_string(EcnMode m) {
  switch (m) {
    case EcnMode::Off: return "off";
    case EcnMode::Classic: return "classic";
    case EcnMode::AccEcnL4S: return "accecn";
  }
  return "?";
}

inline std::optional<CcKind> parse_cc_kind(std::string_view s) {
  for (auto k : {CcKind::Reno, CcKind::Cubic, CcKind::Prague, CcKind::BbrV1, CcKind::BbrV2})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

inline std::optional<EcnMode> parse_ecn_mode(std::string_view s) {
  for (auto m : {EcnMode::Off, EcnMode::Classic, EcnMode::AccEcnL4S})
    if (s == to_string(m)) return m;
  return std::nullopt;
}

class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct FlowSpec {
  CcKind cc = CcKind::Cubic;
  EcnMode ecn_mode = EcnMode::Off;
  bool fallback = false;  // Prague only
  SimTime start_at{};
  cc::FallbackConfig fallback_cfg;

  static FlowSpec prague(bool with_fallback = false) {
    FlowSpec f;
    f.cc = CcKind::Prague;
    f.ecn_mode = EcnMode::AccEcnL4S;
    f.fallback = with_fallback;
    return f;
  }
  static FlowSpec make(CcKind cc, EcnMode ecn) {
    FlowSpec f;
    f.cc = cc;
    f.ecn_mode = ecn;
    return f;
  }

  void validate() const {
    if (fallback && cc != CcKind::Prague) throw ScenarioError("fallback is only valid for prague");
    if (ecn_mode == EcnMode::AccEcnL4S && cc != CcKind::Prague && cc != CcKind::BbrV2)
      throw ScenarioError("accecn (L4S) mode is only valid for prague or bbr2");
    if (cc == CcKind::Prague && ecn_mode != EcnMode::AccEcnL4S)
      throw ScenarioError("prague requires accecn");
    if (cc == CcKind::BbrV1 && ecn_mode != EcnMode::Off) throw ScenarioError("bbr1 does not support ECN");
  }

  // Short label such as "cubic-ecn", "prague-fb", "bbr2-accecn".
  std::string label() const {
    std::string s(to_string(cc));
    if (cc == CcKind::Prague) return fallback ? s + "-fb" : s;
    if (ecn_mode == EcnMode::Classic) s += "-ecn";
    if (ecn_mode == EcnMode::AccEcnL4S) s += "-accecn";
    return s;
  }
};

inline std::optional<FlowSpec> parse_flow_label(std::string_view s) {
  if (s == "prague") return FlowSpec::prague(false);
  if (s == "prague-fb") return FlowSpec::prague(true);
  for (auto cc : {CcKind::Reno, CcKind::Cubic, CcKind::BbrV1, CcKind::BbrV2}) {
    for (auto m : {EcnMode::Off, EcnMode::Classic, EcnMode::AccEcnL4S}) {
      FlowSpec f = FlowSpec::make(cc, m);
      if (f.label() == s) {
        try {
          f.validate();
        } catch (const ScenarioError&) {
          return std::nullopt;
        }
        return f;
      }
    }
  }
  return std::nullopt;
}

inline std::unique_ptr<cc::CongestionController> make_controller(const FlowSpec& f, std::uint64_t seed) {
  f.validate();
  switch (f.cc) {
    case CcKind::Reno: return std::make_unique<cc::Reno>(f.ecn_mode == EcnMode::Classic);
    case CcKind::Cubic: return std::make_unique<cc::Cubic>(f.ecn_mode == EcnMode::Classic);
    case CcKind::Prague: {
      cc::PragueConfig pc;
      if (f.fallback) pc.fallback = f.fallback_cfg;
      return std::make_unique<cc::Prague>(pc);
    }
    case CcKind::BbrV1: {
      cc::BbrConfig bc;
      bc.version = cc::BbrVersion::V1;
      bc.phase_seed = seed;
      return std::make_unique<cc::Bbr>(bc);
    }
    case CcKind::BbrV2: {
      cc::BbrConfig bc;
      bc.version = cc::BbrVersion::V2;
      bc.ecn_enabled = f.ecn_mode != EcnMode::Off;
      bc.accecn_l4s = f.ecn_mode == EcnMode::AccEcnL4S;
      bc.phase_seed = seed;
      return std::make_unique<cc::Bbr>(bc);
    }
  }
  throw ScenarioError("unknown congestion controller");
}

struct Scenario {
  std::string id;
  std::uint64_t bottleneck_rate_bps = 100'000'000;
  std::uint64_t access_rate_bps = 1'000'000'000;
  SimTime base_rtt = SimTime::ms(10);
  double buffer_bdp = 1.0;
  aqm::QueueConfig queue;  // buffer_limit is derived from buffer_bdp
  std::vector<FlowSpec> flows{FlowSpec::prague(), FlowSpec::make(CcKind::Cubic, EcnMode::Off)};
  SimTime duration = SimTime::sec(60);
  std::uint32_t trials = 10;
  std::vector<std::uint64_t> seeds;  // empty: 1..trials
  // Random start offset per flow, drawn uniformly from [0, start_jitter).
  std::optional<SimTime> start_jitter;
  std::optional<SimTime> sample_period;  // time-series sampling
  std::size_t max_pending_events = 5'000'000;

  std::uint64_t buffer_bytes() const {
    const double bdp_bytes = static_cast<double>(bottleneck_rate_bps) * base_rtt.seconds() / 8.0;
    return static_cast<std::uint64_t>(buffer_bdp * bdp_bytes + 0.5);
  }

  SimTime jitter() const { return start_jitter.value_or(base_rtt); }

  std::vector<std::uint64_t> seed_list() const {
    if (!seeds.empty()) return seeds;
    std::vector<std::uint64_t> s;
    for (std::uint32_t i = 1; i <= trials; ++i) s.push_back(i);
    return s;
  }

  void validate() const {
    if (duration == SimTime{}) throw ScenarioError("duration must be > 0");
    if (trials < 1) throw ScenarioError("trials must be >= 1");
    if (!seeds.empty() && seeds.size() != trials) throw ScenarioError("seed list length must equal trials");
    if (flows.empty() || flows.size() > 2) throw ScenarioError("a scenario has one or two flows");
    if (bottleneck_rate_bps == 0 || access_rate_bps == 0) throw ScenarioError("link rates must be > 0");
    if (!(buffer_bdp > 0.0)) throw ScenarioError("buffer_bdp must be > 0");
    for (const auto& f : flows) f.validate();
    aqm::QueueConfig q = queue;
    q.buffer_limit = buffer_bytes();
    try {
      q.validate();
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(e.what());
    }
  }

  std::string describe() const {
    std::ostringstream os;
    os << aqm::to_string(queue.kind) << " buf=" << buffer_bdp << "BDP";
    for (const auto& f : flows) os << " " << f.label();
    return os.str();
  }
};

}  // namespace l4sim
