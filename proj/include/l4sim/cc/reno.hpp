#pragma once

#include <algorithm>
#include <limits>

#include "l4sim/cc/controller.hpp"

namespace l4sim::cc {

// AIMD: +1 packet per RTT, halve on a loss or ECN round.
class Reno final : public CongestionController {
 public:
  Reno(bool ecn_enabled, double initial_cwnd = 10.0)
      : ecn_(ecn_enabled), cwnd_(initial_cwnd) {}

  CcDecision on_ack(const AckFeedback& fb, SimTime) override {
    if (ecn_ && ack_marked(fb, FeedbackMode::ClassicECN) && gate_.admit(fb.acked_tx, fb.next_tx)) {
      halve();
      return decision();
    }
    if (gate_.in_reduction(fb.acked_tx)) return decision();
    const double pkts = static_cast<double>(fb.bytes_acked) / kMss;
    if (cwnd_ < ssthresh_)
      cwnd_ += pkts;
    else
      cwnd_ += pkts / cwnd_;
    return decision();
  }

  CcDecision on_loss(std::uint64_t lost_tx, std::uint64_t next_tx, SimTime) override {
    if (gate_.admit(lost_tx, next_tx)) halve();
    return decision();
  }

  CcDecision on_rto(std::uint64_t next_tx, SimTime) override {
    gate_.admit(std::numeric_limits<std::uint64_t>::max(), next_tx);
    ssthresh_ = std::max(cwnd_ / 2.0, kMinCwnd);
    cwnd_ = kMinCwnd;
    return decision();
  }

  CcDecision decision() const override {
    return CcDecision{cwnd_, std::nullopt, ecn_ ? Ecn::ECT0 : Ecn::NotECT};
  }
  std::string_view name() const override { return "reno"; }
  FeedbackMode feedback_mode() const override { return FeedbackMode::ClassicECN; }
  std::uint64_t reductions() const override { return gate_.count(); }

  double cwnd() const { return cwnd_; }
  double ssthresh() const { return ssthresh_; }
  void set_cwnd(double w) { cwnd_ = w; }
  void set_ssthresh(double s) { ssthresh_ = s; }

 private:
  void halve() {
    cwnd_ = std::max(cwnd_ / 2.0, kMinCwnd);
    ssthresh_ = cwnd_;
  }

  bool ecn_;
  double cwnd_;
  double ssthresh_ = std::numeric_limits<double>::infinity();
  ReductionGate gate_;
};

}  // namespace l4sim::cc
