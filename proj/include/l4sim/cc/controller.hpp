#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string_view>

#include "l4sim/core/packet.hpp"
#include "l4sim/core/sim_time.hpp"

namespace l4sim::cc {

inline constexpr double kMinCwnd = 2.0;

enum class FeedbackMode : std::uint8_t { ClassicECN, AccECN };

struct CcDecision {
  double cwnd = 10.0;                      // packets, fractional internally
  std::optional<double> pacing_rate_bps;   // nullopt means ack-clocked
  Ecn ect_codepoint = Ecn::NotECT;

  std::uint32_t applied_cwnd() const {
    return static_cast<std::uint32_t>(std::max(cwnd, kMinCwnd));
  }
};

// Uniform sender-side contract shared by every congestion controller.
class CongestionController {
 public:
  virtual ~CongestionController() = default;

  virtual CcDecision on_ack(const AckFeedback& fb, SimTime now) = 0;

  // Loss detected by duplicate-ACK threshold. `lost_tx` is the transmission
  // index of the lost packet, `next_tx` the next index the sender will use.
  virtual CcDecision on_loss(std::uint64_t lost_tx, std::uint64_t next_tx, SimTime now) = 0;

  // Retransmission timeout.
  virtual CcDecision on_rto(std::uint64_t next_tx, SimTime now) = 0;

  virtual CcDecision decision() const = 0;
  virtual std::string_view name() const = 0;

  // Which receiver feedback the controller expects.
  virtual FeedbackMode feedback_mode() const = 0;

  // Number of multiplicative decreases applied so far (for tests and traces).
  virtual std::uint64_t reductions() const = 0;
};

// Tracks "at most one multiplicative decrease per RTT round": a congestion
// signal only counts if the signalled packet was sent after the previous cut.
class ReductionGate {
 public:
  bool admit(std::uint64_t signalled_tx, std::uint64_t next_tx) {
    if (signalled_tx < cwr_end_) return false;
    cwr_end_ = next_tx;
    ++count_;
    return true;
  }
  bool in_reduction(std::uint64_t acked_tx) const { return acked_tx < cwr_end_; }
  std::uint64_t count() const { return count_; }

 private:
  std::uint64_t cwr_end_ = 0;
  std::uint64_t count_ = 0;
};

// Whether an ACK carries a congestion mark under the given feedback mode.
inline bool ack_marked(const AckFeedback& fb, FeedbackMode mode) {
  return mode == FeedbackMode::AccECN ? fb.newly_marked_bytes > 0 : fb.ece;
}

}  // namespace l4sim::cc
