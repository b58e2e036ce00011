#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <stdexcept>

#include "l4sim/cc/controller.hpp"
#include "l4sim/cc/fallback_detector.hpp"

namespace l4sim::cc {

// EWMA of the per-round marked fraction.
inline double prague_alpha_update(double alpha, double frac_marked, double g) {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(alpha) || !in_unit(frac_marked) || !in_unit(g))
    throw std::domain_error("prague_alpha_update: inputs must lie in [0,1]");
  return std::clamp((1.0 - g) * alpha + g * frac_marked, 0.0, 1.0);
}

// Scalable decrease: cut in proportion to the marking extent.
inline double prague_on_round_with_marks(double cwnd, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::domain_error("prague_on_round_with_marks: alpha outside [0,1]");
  return std::max(cwnd * (1.0 - alpha / 2.0), kMinCwnd);
}

enum class PragueMode : std::uint8_t { Scalable, ClassicFallback };

struct PragueConfig {
  double initial_cwnd = 10.0;
  double g = 1.0 / 16.0;
  double initial_alpha = 1.0;
  std::optional<FallbackConfig> fallback;  // detector present iff set
};

struct PragueState {
  double cwnd = 10.0;
  double alpha = 1.0;
  double g = 1.0 / 16.0;
  PragueMode mode = PragueMode::Scalable;
};

class Prague final : public CongestionController {
 public:
  explicit Prague(PragueConfig cfg = {}) : cfg_(cfg) {
    s_.cwnd = cfg.initial_cwnd;
    s_.alpha = cfg.initial_alpha;
    s_.g = cfg.g;
    if (cfg.fallback) detector_.emplace(*cfg.fallback);
  }

  CcDecision on_ack(const AckFeedback& fb, SimTime) override {
    round_acked_ += fb.bytes_acked;
    round_marked_ += fb.newly_marked_bytes;
    const bool marked = fb.newly_marked_bytes > 0;

    bool round_ended = false;
    if (fb.acked_tx >= round_end_tx_) {
      round_ended = true;
      end_round();
      round_end_tx_ = fb.next_tx;
    }

    if (detector_) {
      if (marked) detector_->on_mark();
      const QueueClass cls = detector_->observe(fb.rtt_sample, round_ended);
      s_.mode = cls == QueueClass::ClassicQueue ? PragueMode::ClassicFallback : PragueMode::Scalable;
    }

    if (marked && gate_.admit(fb.acked_tx, fb.next_tx)) {
      if (s_.mode == PragueMode::Scalable)
        s_.cwnd = prague_on_round_with_marks(s_.cwnd, s_.alpha);
      else
        s_.cwnd = std::max(s_.cwnd / 2.0, kMinCwnd);
      ssthresh_ = s_.cwnd;
      return decision();
    }
    if (gate_.in_reduction(fb.acked_tx)) return decision();

    const double pkts = static_cast<double>(fb.bytes_acked) / kMss;
    if (s_.cwnd < ssthresh_)
      s_.cwnd += pkts;
    else
      s_.cwnd += pkts / s_.cwnd;
    return decision();
  }

  // Losses always get the classic halving.
  CcDecision on_loss(std::uint64_t lost_tx, std::uint64_t next_tx, SimTime) override {
    if (gate_.admit(lost_tx, next_tx)) {
      s_.cwnd = std::max(s_.cwnd / 2.0, kMinCwnd);
      ssthresh_ = s_.cwnd;
    }
    return decision();
  }

  CcDecision on_rto(std::uint64_t next_tx, SimTime) override {
    gate_.admit(std::numeric_limits<std::uint64_t>::max(), next_tx);
    ssthresh_ = std::max(s_.cwnd / 2.0, kMinCwnd);
    s_.cwnd = kMinCwnd;
    return decision();
  }

  // ECT(1) in both modes: fallback changes the response, not the identifier.
  CcDecision decision() const override { return CcDecision{s_.cwnd, std::nullopt, Ecn::ECT1}; }
  std::string_view name() const override { return detector_ ? "prague-fallback" : "prague"; }
  FeedbackMode feedback_mode() const override { return FeedbackMode::AccECN; }
  std::uint64_t reductions() const override { return gate_.count(); }

  const PragueState& state() const { return s_; }
  const FallbackDetector* detector() const { return detector_ ? &*detector_ : nullptr; }
  void set_cwnd(double w) { s_.cwnd = w; }
  void set_ssthresh(double v) { ssthresh_ = v; }

 private:
  void end_round() {
    if (round_acked_ > 0) {
      const double frac = std::min(1.0, static_cast<double>(round_marked_) / static_cast<double>(round_acked_));
      s_.alpha = prague_alpha_update(s_.alpha, frac, s_.g);
    }
    round_acked_ = 0;
    round_marked_ = 0;
  }

  PragueConfig cfg_;
  PragueState s_;
  double ssthresh_ = std::numeric_limits<double>::infinity();
  std::uint64_t round_end_tx_ = 0;
  std::uint64_t round_acked_ = 0;
  std::uint64_t round_marked_ = 0;
  std::optional<FallbackDetector> detector_;
  ReductionGate gate_;
};

}  // namespace l4sim::cc
