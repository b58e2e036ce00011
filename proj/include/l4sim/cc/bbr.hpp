#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include "l4sim/cc/controller.hpp"
#include "l4sim/cc/windowed_filter.hpp"

namespace l4sim::cc {

// Simplified BBR models. v1 follows the original model-based design and
// ignores ECN entirely. v2 adds the inflight_hi / inflight_lo bounds driven by
// per-round loss and CE-mark fractions.

enum class BbrVersion : std::uint8_t { V1, V2 };
enum class BbrMode : std::uint8_t { Startup, Drain, ProbeBW, ProbeRTT };

inline constexpr std::array<double, 8> kBbrGainCycle{1.25, 0.75, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
inline constexpr double kBbrHighGain = 2.885;  // 2/ln(2)

struct BbrConfig {
  BbrVersion version = BbrVersion::V1;
  bool ecn_enabled = false;  // v2 only
  bool accecn_l4s = false;   // v2 only: ECT(1) identifier
  double initial_cwnd = 10.0;
  std::uint32_t bw_window_rounds = 10;
  SimTime min_rtt_window = SimTime::sec(10);
  SimTime probe_rtt_duration = SimTime::ms(200);
  double cwnd_gain = 2.0;
  // v2 parameters
  double beta = 0.7;
  double loss_thresh = 0.02;
  double ecn_thresh = 0.5;
  double ecn_gain = 1.0 / 16.0;
  double ecn_factor = 0.04;  // per-round inflight_lo cut is ecn_factor * ecn_alpha
  double headroom = 0.85;
  bool ecn_lower_bound = true;  // marks also shrink inflight_lo every marked round
  std::uint64_t phase_seed = 0;  // picks the initial gain-cycle phase
};

struct BbrState {
  BbrMode mode = BbrMode::Startup;
  double btlbw_bps = 0.0;
  SimTime min_rtt = SimTime::max();
  double pacing_gain = kBbrHighGain;
  double cwnd_gain = kBbrHighGain;
  std::size_t cycle_index = 0;
  double inflight_hi = std::numeric_limits<double>::infinity();
  double inflight_lo = std::numeric_limits<double>::infinity();
  double ecn_alpha = 0.0;
};

class Bbr final : public CongestionController {
 public:
  explicit Bbr(BbrConfig cfg = {})
      : cfg_(cfg), bw_filter_(cfg.bw_window_rounds), cwnd_(cfg.initial_cwnd) {
    if (cfg_.version == BbrVersion::V1) {
      cfg_.ecn_enabled = false;
      cfg_.accecn_l4s = false;
    }
    if (cfg_.accecn_l4s) cfg_.ecn_enabled = true;
  }

  CcDecision on_ack(const AckFeedback& fb, SimTime now) override {
    const double acked_pkts = static_cast<double>(fb.bytes_acked) / kMss;
    delivered_pkts_ += acked_pkts;

    bool round_start = false;
    if (fb.acked_tx >= round_end_tx_) {
      round_start = true;
      ++round_count_;
      round_end_tx_ = fb.next_tx;
    }

    if (fb.delivery_rate_bps > 0.0) s_.btlbw_bps = bw_filter_.update(fb.delivery_rate_bps, round_count_);
    update_min_rtt(fb.rtt_sample, now);

    if (cfg_.version == BbrVersion::V2) {
      round_delivered_ += acked_pkts;
      if (cfg_.ecn_enabled) round_marked_ += static_cast<double>(fb.newly_marked_bytes) / kMss;
      if (round_start) end_v2_round(fb.prior_inflight);
    }

    if (round_start) {
      if (s_.mode == BbrMode::ProbeBW && s_.cycle_index == 0 && cfg_.version == BbrVersion::V2)
        grow_inflight_hi();
      check_full_pipe();
    }
    advance_mode(fb, now, round_start);
    set_pacing();
    set_cwnd(acked_pkts);
    return decision();
  }

  CcDecision on_loss(std::uint64_t, std::uint64_t, SimTime) override {
    if (cfg_.version == BbrVersion::V2) round_lost_ += 1.0;
    return decision();
  }

  CcDecision on_rto(std::uint64_t, SimTime) override {
    ++reductions_;
    cwnd_ = 4.0;
    if (cfg_.version == BbrVersion::V2) s_.inflight_lo = 4.0;
    return decision();
  }

  CcDecision decision() const override {
    Ecn cp = Ecn::NotECT;
    if (cfg_.accecn_l4s)
      cp = Ecn::ECT1;
    else if (cfg_.ecn_enabled)
      cp = Ecn::ECT0;
    return CcDecision{cwnd_, pacing_rate_, cp};
  }

  std::string_view name() const override {
    if (cfg_.version == BbrVersion::V1) return "bbr1";
    if (cfg_.accecn_l4s) return "bbr2-accecn";
    return cfg_.ecn_enabled ? "bbr2-ecn" : "bbr2";
  }
  FeedbackMode feedback_mode() const override { return FeedbackMode::AccECN; }
  std::uint64_t reductions() const override { return reductions_; }

  const BbrState& state() const { return s_; }
  const BbrConfig& config() const { return cfg_; }

  // Estimated bandwidth-delay product in packets.
  double bdp_packets() const {
    if (s_.btlbw_bps <= 0.0 || s_.min_rtt == SimTime::max()) return cfg_.initial_cwnd;
    return s_.btlbw_bps * s_.min_rtt.seconds() / (8.0 * kMss);
  }

  // Test hook: place the model in ProbeBW at a given phase with a known estimate.
  void force_probe_bw(double btlbw_bps, SimTime min_rtt, std::size_t phase, SimTime now) {
    s_.mode = BbrMode::ProbeBW;
    filled_pipe_ = true;
    bw_filter_.reset(btlbw_bps, round_count_);
    s_.btlbw_bps = btlbw_bps;
    s_.min_rtt = min_rtt;
    min_rtt_stamp_ = now;
    s_.cycle_index = phase % kBbrGainCycle.size();
    cycle_stamp_ = now;
    s_.pacing_gain = kBbrGainCycle[s_.cycle_index];
    s_.cwnd_gain = cfg_.cwnd_gain;
    set_pacing();
  }

 private:
  void update_min_rtt(SimTime sample, SimTime now) {
    if (sample == SimTime{}) return;
    const bool expired = now > min_rtt_stamp_ + cfg_.min_rtt_window;
    if (sample <= s_.min_rtt || expired) {
      s_.min_rtt = sample;
      min_rtt_stamp_ = now;
    }
    if (expired && s_.mode != BbrMode::ProbeRTT) enter_probe_rtt();
  }

  void check_full_pipe() {
    if (filled_pipe_) return;
    if (s_.btlbw_bps >= full_bw_ * 1.25) {
      full_bw_ = s_.btlbw_bps;
      full_bw_count_ = 0;
      return;
    }
    if (++full_bw_count_ >= 3) filled_pipe_ = true;
  }

  void advance_mode(const AckFeedback& fb, SimTime now, bool round_start) {
    const double inflight = fb.prior_inflight;
    switch (s_.mode) {
      case BbrMode::Startup:
        if (filled_pipe_) {
          s_.mode = BbrMode::Drain;
          s_.pacing_gain = 1.0 / kBbrHighGain;
          s_.cwnd_gain = kBbrHighGain;
        }
        break;
      case BbrMode::Drain:
        if (inflight <= bdp_packets()) enter_probe_bw(now);
        break;
      case BbrMode::ProbeBW:
        if (phase_done(inflight, now)) next_phase(now);
        break;
      case BbrMode::ProbeRTT:
        if (!probe_rtt_done_stamp_ && inflight <= probe_rtt_cwnd()) {
          probe_rtt_done_stamp_ = now + cfg_.probe_rtt_duration;
          probe_rtt_round_done_ = false;
          probe_rtt_round_target_ = round_count_ + 1;
        } else if (probe_rtt_done_stamp_) {
          if (round_start && round_count_ >= probe_rtt_round_target_) probe_rtt_round_done_ = true;
          if (probe_rtt_round_done_ && now >= *probe_rtt_done_stamp_) {
            min_rtt_stamp_ = now;
            cwnd_ = std::max(cwnd_, prior_cwnd_);
            if (filled_pipe_)
              enter_probe_bw(now);
            else {
              s_.mode = BbrMode::Startup;
              s_.pacing_gain = kBbrHighGain;
              s_.cwnd_gain = kBbrHighGain;
            }
          }
        }
        break;
    }
  }

  bool phase_done(double inflight, SimTime now) const {
    const bool full_length = s_.min_rtt != SimTime::max() && now - cycle_stamp_ > s_.min_rtt;
    const double gain = s_.pacing_gain;
    if (gain > 1.0) return full_length && (round_lost_ > 0.0 || inflight >= gain * bdp_packets());
    if (gain < 1.0) return full_length || inflight <= bdp_packets();
    return full_length;
  }

  void enter_probe_bw(SimTime now) {
    s_.mode = BbrMode::ProbeBW;
    s_.cwnd_gain = cfg_.cwnd_gain;
    // Random start phase, never the drain phase.
    const std::uint64_t r = mix(cfg_.phase_seed + 0x2545f4914f6cdd1dULL * (++phase_draws_));
    std::size_t idx = static_cast<std::size_t>(r % (kBbrGainCycle.size() - 1));
    if (idx >= 1) ++idx;
    s_.cycle_index = idx;
    cycle_stamp_ = now;
    s_.pacing_gain = kBbrGainCycle[s_.cycle_index];
    probe_step_ = 1.0;
  }

  void next_phase(SimTime now) {
    s_.cycle_index = (s_.cycle_index + 1) % kBbrGainCycle.size();
    cycle_stamp_ = now;
    s_.pacing_gain = kBbrGainCycle[s_.cycle_index];
    if (s_.cycle_index == 0) {
      probe_step_ = 1.0;
      s_.inflight_lo = std::numeric_limits<double>::infinity();
    }
  }

  void enter_probe_rtt() {
    prior_cwnd_ = s_.mode == BbrMode::ProbeRTT ? prior_cwnd_ : cwnd_;
    s_.mode = BbrMode::ProbeRTT;
    s_.pacing_gain = 1.0;
    probe_rtt_done_stamp_.reset();
  }

  double probe_rtt_cwnd() const {
    return cfg_.version == BbrVersion::V1 ? 4.0 : std::max(4.0, 0.5 * bdp_packets());
  }

  void end_v2_round(double inflight) {
    const double total = round_delivered_ + round_lost_;
    const bool loss_high = total > 0.0 && round_lost_ / total > cfg_.loss_thresh;
    double ce_ratio = 0.0;
    if (cfg_.ecn_enabled && round_delivered_ > 0.0) {
      ce_ratio = std::min(1.0, round_marked_ / round_delivered_);
      s_.ecn_alpha = std::clamp((1.0 - cfg_.ecn_gain) * s_.ecn_alpha + cfg_.ecn_gain * ce_ratio, 0.0, 1.0);
    }
    const bool ecn_high = cfg_.ecn_enabled && ce_ratio > cfg_.ecn_thresh;

    if (loss_high || ecn_high) {
      ++reductions_;
      s_.inflight_hi = std::max(std::min(inflight, s_.inflight_hi), cfg_.beta * bdp_packets());
      s_.inflight_hi = std::max(s_.inflight_hi, 4.0);
      if (!filled_pipe_) filled_pipe_ = true;
      if (s_.mode == BbrMode::ProbeBW && s_.pacing_gain > 1.0) {
        s_.cycle_index = 1;
        s_.pacing_gain = kBbrGainCycle[1];
      }
    }

    // Lower bound adapts every round that saw congestion signals.
    const bool lost_any = round_lost_ > 0.0;
    const bool marked_any = cfg_.ecn_enabled && cfg_.ecn_lower_bound && round_marked_ > 0.0;
    if (lost_any || marked_any) {
      if (std::isinf(s_.inflight_lo)) s_.inflight_lo = cwnd_;
      double lo = s_.inflight_lo;
      if (lost_any) lo = std::max(inflight, cfg_.beta * s_.inflight_lo);
      if (marked_any) lo = std::min(lo, s_.inflight_lo * (1.0 - cfg_.ecn_factor * s_.ecn_alpha));
      s_.inflight_lo = std::max(lo, 4.0);
    }

    round_delivered_ = 0.0;
    round_lost_ = 0.0;
    round_marked_ = 0.0;
  }

  void grow_inflight_hi() {
    if (std::isinf(s_.inflight_hi)) return;
    s_.inflight_hi += probe_step_;
    probe_step_ = std::min(probe_step_ * 2.0, 64.0);
  }

  void set_pacing() {
    if (s_.btlbw_bps > 0.0) {
      pacing_rate_ = s_.pacing_gain * s_.btlbw_bps;
    } else {
      const double rtt = s_.min_rtt == SimTime::max() ? 1e-3 : std::max(s_.min_rtt.seconds(), 1e-4);
      pacing_rate_ = kBbrHighGain * cfg_.initial_cwnd * kMss * 8.0 / rtt;
    }
  }

  void set_cwnd(double acked) {
    const double target = s_.cwnd_gain * bdp_packets() + 3.0;
    if (filled_pipe_)
      cwnd_ = std::min(cwnd_ + acked, target);
    else if (cwnd_ < target || delivered_pkts_ < cfg_.initial_cwnd)
      cwnd_ += acked;
    if (cfg_.version == BbrVersion::V2) {
      const double hi = s_.mode == BbrMode::ProbeBW && s_.pacing_gain > 1.0 ? s_.inflight_hi
                                                                             : cfg_.headroom * s_.inflight_hi;
      cwnd_ = std::min({cwnd_, hi, s_.inflight_lo});
    }
    if (s_.mode == BbrMode::ProbeRTT) cwnd_ = std::min(cwnd_, probe_rtt_cwnd());
    cwnd_ = std::max(cwnd_, 4.0);
  }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  BbrConfig cfg_;
  BbrState s_;
  MaxFilter<double, std::uint64_t> bw_filter_;
  double cwnd_;
  std::optional<double> pacing_rate_;
  double delivered_pkts_ = 0.0;
  std::uint64_t round_count_ = 0;
  std::uint64_t round_end_tx_ = 0;
  SimTime min_rtt_stamp_{};
  SimTime cycle_stamp_{};
  bool filled_pipe_ = false;
  double full_bw_ = 0.0;
  int full_bw_count_ = 0;
  double prior_cwnd_ = 0.0;
  std::optional<SimTime> probe_rtt_done_stamp_;
  bool probe_rtt_round_done_ = false;
  std::uint64_t probe_rtt_round_target_ = 0;
  std::uint64_t phase_draws_ = 0;
  double probe_step_ = 1.0;
  double round_delivered_ = 0.0;
  double round_lost_ = 0.0;
  double round_marked_ = 0.0;
  std::uint64_t reductions_ = 0;
};

inline CcDecision bbr_on_ack(Bbr& state, const AckFeedback& fb, SimTime now) { return state.on_ack(fb, now); }

}  // namespace l4sim::cc
