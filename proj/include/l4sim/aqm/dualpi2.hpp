#pragma once

#include <algorithm>
#include <utility>

#include "l4sim/aqm/queue_discipline.hpp"

namespace l4sim::aqm {

enum class DualQueue : std::uint8_t { LQueue, CQueue };

// L4S identifier: ECT(1), and CE (which may have been set upstream on an L4S packet).
constexpr DualQueue dualpi2_classify(Ecn e) {
  return (e == Ecn::ECT1 || e == Ecn::CE) ? DualQueue::LQueue : DualQueue::CQueue;
}

struct Pi2State {
  double p_prime = 0.0;
  SimTime prev_qdelay{};
  SimTime last_update{};
};

// One PI step: p' += alpha (q - target) + beta (q - q_prev), delays in seconds.
inline double dualpi2_pi_update(Pi2State& st, SimTime qdelay, const DualPi2Config& cfg) {
  const double q = qdelay.seconds();
  const double delta = cfg.alpha * (q - cfg.pi_target.seconds()) + cfg.beta * (q - st.prev_qdelay.seconds());
  st.p_prime = std::clamp(st.p_prime + delta, 0.0, 1.0);
  st.prev_qdelay = qdelay;
  return st.p_prime;
}

struct CoupledProbabilities {
  double p_classic = 0.0;
  double p_coupled_l4s = 0.0;
};

inline CoupledProbabilities dualpi2_probabilities(double p_prime, double k) {
  return {p_prime * p_prime, std::min(k * p_prime, 1.0)};
}

// Deterministic stand-in for a Bernoulli draw: fires once each time the
// accumulated likelihood passes 1.
class Recur {
 public:
  bool operator()(double likelihood) {
    count_ += likelihood;
    if (count_ > 1.0) {
      count_ -= 1.0;
      return true;
    }
    return false;
  }

 private:
  double count_ = 0.0;
};

// Dual-queue coupled AQM. ECT(1)/CE traffic uses the L queue with a shallow
// step threshold plus the coupled probability k*p'; other traffic uses the C
// queue with the squared probability p'^2 (mark ECT(0), drop NotECT). The
// buffer limit is shared by both queues.
class DualPi2 final : public QueueDiscipline {
 public:
  explicit DualPi2(QueueConfig cfg) : QueueDiscipline(cfg) {}

  EnqueueVerdict enqueue(Packet pkt, SimTime now) override {
    if (bytes() + pkt.size > cfg_.buffer_limit) {
      note_rejected(pkt);
      return {Verdict::Drop, false, {}};
    }
    pkt.enqueued_at = now;
    const auto size = pkt.size;
    if (dualpi2_classify(pkt.ecn) == DualQueue::LQueue)
      l_.push(std::move(pkt));
    else
      c_.push(std::move(pkt));
    note_enqueue(size);
    return {};
  }

  DequeueResult dequeue(SimTime now) override {
    DequeueResult r;
    const auto& d = cfg_.dualpi2;
    while (!l_.empty() || !c_.empty()) {
      const auto probs = dualpi2_probabilities(pi_.p_prime, d.k);
      if (serve_l(now)) {
        Packet p = l_.pop();
        const bool step = now - p.enqueued_at > d.step_thresh;
        if (step || l_recur_(probs.p_coupled_l4s)) {
          if (mark_or_refuse(p)) {
            r.marked = true;
          } else {
            note_aqm_drop(p);
            r.dropped.push_back(std::move(p));
            continue;
          }
        }
        note_delivery(p);
        r.packet = std::move(p);
        return r;
      }
      Packet p = c_.pop();
      if (c_recur_(probs.p_classic)) {
        if (mark_or_refuse(p)) {
          r.marked = true;
        } else {
          note_aqm_drop(p);
          r.dropped.push_back(std::move(p));
          continue;
        }
      }
      note_delivery(p);
      r.packet = std::move(p);
      return r;
    }
    return r;
  }

  std::uint64_t bytes() const override { return l_.bytes() + c_.bytes(); }
  std::size_t packets() const override { return l_.size() + c_.size(); }

  std::optional<SimTime> timer_interval() const override { return cfg_.dualpi2.t_update; }

  // PI input is the larger of the two head sojourns.
  void on_timer(SimTime now) override {
    const SimTime qdelay = std::max(l_.head_sojourn(now), c_.head_sojourn(now));
    dualpi2_pi_update(pi_, qdelay, cfg_.dualpi2);
    pi_.last_update = now;
  }

  const Pi2State& pi_state() const { return pi_; }
  std::size_t l_packets() const { return l_.size(); }
  std::size_t c_packets() const { return c_.size(); }

 private:
  bool serve_l(SimTime now) const {
    if (c_.empty()) return true;
    if (l_.empty()) return false;
    return c_.head_sojourn(now) < l_.head_sojourn(now) + cfg_.dualpi2.tshift;
  }

  ByteFifo l_;
  ByteFifo c_;
  Pi2State pi_;
  Recur l_recur_;
  Recur c_recur_;
};

}  // namespace l4sim::aqm
