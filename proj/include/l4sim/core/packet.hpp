#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>

#include "l4sim/core/sim_time.hpp"

namespace l4sim {

inline constexpr std::uint32_t kMss = 1500;  // bytes, header-inclusive
inline constexpr std::uint32_t kHeaderBytes = 52;  // IPv4 + TCP with timestamps
inline constexpr std::uint32_t kPayload = kMss - kHeaderBytes;

// Application bytes carried by a data packet of the given wire size.
constexpr std::uint32_t payload_bytes(std::uint32_t wire_size) {
  return wire_size > kHeaderBytes ? wire_size - kHeaderBytes : 0;
}

enum class Ecn : std::uint8_t { NotECT, ECT0, ECT1, CE };

constexpr bool is_ect(Ecn e) { return e == Ecn::ECT0 || e == Ecn::ECT1; }

constexpr std::string_view to_string(Ecn e) {
  switch (e) {
    case Ecn::NotECT: return "NotECT";
    case Ecn::ECT0: return "ECT0";
    case Ecn::ECT1: return "ECT1";
    case Ecn::CE: return "CE";
  }
  return "?";
}

// Receiver-to-sender feedback carried on every ACK.
struct AckFeedback {
  std::uint64_t bytes_acked = 0;
  SimTime rtt_sample{};
  std::uint64_t newly_marked_bytes = 0;  // exact count (accurate ECN)
  bool ece = false;                      // classic echo, latched until CWR
  std::uint32_t dup_count = 0;

  // Sender-side annotations filled in before the controller sees the ACK.
  std::uint64_t acked_tx = 0;       // transmission index of the acknowledged packet
  std::uint64_t next_tx = 0;        // next transmission index the sender will use
  std::uint32_t prior_inflight = 0; // packets in flight before this ACK
  double delivery_rate_bps = 0.0;   // rate sample (0 when unavailable)
  bool is_round_start = false;      // first ACK of a new delivery round
};

struct Packet {
  std::uint64_t id = 0;
  std::uint32_t flow_id = 0;
  std::uint32_t size = kMss;
  Ecn ecn = Ecn::NotECT;
  std::uint64_t seq = 0;       // byte offset in the flow
  std::uint64_t tx_index = 0;  // per-flow transmission counter (retransmissions get a fresh one)
  SimTime sent_at{};
  SimTime enqueued_at{};
  bool is_ack = false;
  bool cwr = false;  // sender acknowledges a classic-ECN echo
  std::optional<AckFeedback> ack_info;

  // Congestion-experienced marking. Only ECN-capable packets may be marked.
  void mark_ce() {
    if (!is_ect(ecn) && ecn != Ecn::CE) throw std::logic_error("CE mark on NotECT packet");
    ecn = Ecn::CE;
  }
};

}  // namespace l4sim
