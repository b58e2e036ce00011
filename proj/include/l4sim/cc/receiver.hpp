#pragma once

#include <cstdint>

#include "l4sim/cc/controller.hpp"
#include "l4sim/core/packet.hpp"

namespace l4sim::cc {

// Receiver side of ECN feedback. Every delivered data packet produces one ACK.
//  - AccECN: the ACK reports exactly how many bytes of this packet were CE.
//  - ClassicECN: ECE latches on the first CE and stays set until a packet
//    carrying CWR arrives (RFC 3168 semantics).
class Receiver {
 public:
  explicit Receiver(FeedbackMode mode) : mode_(mode) {}

  // rtt_sample is filled in by the sender when the ACK arrives.
  AckFeedback on_data(const Packet& pkt) {
    AckFeedback fb;
    fb.bytes_acked = pkt.size;
    const bool ce = pkt.ecn == Ecn::CE;
    if (ce) {
      ++ce_packets_;
      ce_bytes_ += pkt.size;
    }
    if (mode_ == FeedbackMode::AccECN) {
      fb.newly_marked_bytes = ce ? pkt.size : 0;
    } else {
      if (pkt.cwr) ece_latched_ = false;
      if (ce) ece_latched_ = true;
      fb.ece = ece_latched_;
    }
    return fb;
  }

  FeedbackMode mode() const { return mode_; }
  std::uint64_t ce_packets() const { return ce_packets_; }
  std::uint64_t ce_bytes() const { return ce_bytes_; }

 private:
  FeedbackMode mode_;
  bool ece_latched_ = false;
  std::uint64_t ce_packets_ = 0;
  std::uint64_t ce_bytes_ = 0;
};

inline AckFeedback receiver_feedback(Receiver& rx, const Packet& pkt) { return rx.on_data(pkt); }

}  // namespace l4sim::cc
