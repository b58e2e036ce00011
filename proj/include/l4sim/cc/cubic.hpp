#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "l4sim/cc/controller.hpp"

namespace l4sim::cc {

struct CubicState {
  double cwnd = 10.0;
  double w_max = 0.0;
  double k = 0.0;  // seconds
  double c = 0.4;
  double beta = 0.7;
  SimTime epoch_start{};
  bool epoch_valid = false;
  bool ecn_enabled = false;
};

inline double cubic_k(double w_max, double beta, double c) { return std::cbrt(w_max * (1.0 - beta) / c); }

// W(t) = C (t - K)^3 + W_max, with t measured from the start of the epoch.
inline double cubic_window(double t_since_epoch, const CubicState& s) {
  const double d = t_since_epoch - s.k;
  return s.c * d * d * d + s.w_max;
}

class Cubic final : public CongestionController {
 public:
  explicit Cubic(bool ecn_enabled, double initial_cwnd = 10.0) {
    s_.cwnd = initial_cwnd;
    s_.ecn_enabled = ecn_enabled;
  }

  CcDecision on_ack(const AckFeedback& fb, SimTime now) override {
    if (fb.rtt_sample > SimTime{} && fb.rtt_sample < min_rtt_) min_rtt_ = fb.rtt_sample;
    if (s_.ecn_enabled && ack_marked(fb, FeedbackMode::ClassicECN) && gate_.admit(fb.acked_tx, fb.next_tx)) {
      reduce();
      return decision();
    }
    if (gate_.in_reduction(fb.acked_tx)) return decision();

    const double acked = static_cast<double>(fb.bytes_acked) / kMss;
    if (s_.cwnd < ssthresh_) {
      s_.cwnd += acked;
      return decision();
    }
    if (!s_.epoch_valid) start_epoch(now);

    const double rtt = min_rtt_ == SimTime::max() ? 0.0 : min_rtt_.seconds();
    const double t = (now - s_.epoch_start).seconds() + rtt;
    double target = cubic_window(t, s_);
    target = std::clamp(target, s_.cwnd, 1.5 * s_.cwnd);

    // TCP-friendly estimate of an AIMD flow with the same average rate.
    const double aimd_alpha = 3.0 * (1.0 - s_.beta) / (1.0 + s_.beta);
    w_est_ += aimd_alpha * acked / s_.cwnd;

    if (w_est_ > target)
      s_.cwnd += (w_est_ - s_.cwnd) / s_.cwnd * acked;
    else
      s_.cwnd += (target - s_.cwnd) / s_.cwnd * acked;
    return decision();
  }

  CcDecision on_loss(std::uint64_t lost_tx, std::uint64_t next_tx, SimTime) override {
    if (gate_.admit(lost_tx, next_tx)) reduce();
    return decision();
  }

  CcDecision on_rto(std::uint64_t next_tx, SimTime) override {
    gate_.admit(std::numeric_limits<std::uint64_t>::max(), next_tx);
    s_.w_max = s_.cwnd;
    ssthresh_ = std::max(s_.cwnd * s_.beta, kMinCwnd);
    s_.cwnd = kMinCwnd;
    s_.epoch_valid = false;
    return decision();
  }

  CcDecision decision() const override {
    return CcDecision{s_.cwnd, std::nullopt, s_.ecn_enabled ? Ecn::ECT0 : Ecn::NotECT};
  }
  std::string_view name() const override { return s_.ecn_enabled ? "cubic-ecn" : "cubic"; }
  FeedbackMode feedback_mode() const override { return FeedbackMode::ClassicECN; }
  std::uint64_t reductions() const override { return gate_.count(); }

  const CubicState& state() const { return s_; }
  void set_cwnd(double w) { s_.cwnd = w; }
  void set_ssthresh(double v) { ssthresh_ = v; }

 private:
  void reduce() {
    // fast convergence
    if (s_.cwnd < w_last_max_)
      s_.w_max = s_.cwnd * (1.0 + s_.beta) / 2.0;
    else
      s_.w_max = s_.cwnd;
    w_last_max_ = s_.cwnd;
    s_.cwnd = std::max(s_.cwnd * s_.beta, kMinCwnd);
    ssthresh_ = s_.cwnd;
    s_.epoch_valid = false;
  }

  void start_epoch(SimTime now) {
    s_.epoch_valid = true;
    s_.epoch_start = now;
    if (s_.cwnd < s_.w_max) {
      s_.k = std::cbrt((s_.w_max - s_.cwnd) / s_.c);
    } else {
      s_.k = 0.0;
      s_.w_max = s_.cwnd;
    }
    w_est_ = s_.cwnd;
  }

  CubicState s_;
  double ssthresh_ = std::numeric_limits<double>::infinity();
  double w_est_ = 0.0;
  double w_last_max_ = 0.0;
  SimTime min_rtt_ = SimTime::max();
  ReductionGate gate_;
};

}  // namespace l4sim::cc
