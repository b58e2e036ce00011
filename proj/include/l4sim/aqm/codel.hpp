#pragma once

#include <cmath>

#include "l4sim/aqm/queue_discipline.hpp"

namespace l4sim::aqm {

struct CodelState {
  SimTime first_above_time{};  // zero means "not above target"
  SimTime drop_next{};
  std::uint32_t count = 0;
  std::uint32_t last_count = 0;
  bool dropping = false;
};

// Next drop time: the interval shrinks as interval / sqrt(count).
inline SimTime codel_control_law(SimTime drop_next, std::uint32_t count, SimTime interval) {
  if (count == 0) throw std::invalid_argument("codel_control_law: count must be >= 1");
  const double step = static_cast<double>(interval.count()) / std::sqrt(static_cast<double>(count));
  return drop_next + SimTime(static_cast<SimTime::rep>(step + 0.5));
}

// CoDel dropping state machine (RFC 8289) with the ECN option: ECN-capable
// packets are marked where the algorithm would drop, and marking ends the
// dequeue attempt. Operates on a caller-owned FIFO so the same logic serves
// the single-queue and per-flow variants.
class CodelCore {
 public:
  CodelCore(SimTime target, SimTime interval) : target_(target), interval_(interval) {}

  DequeueResult dequeue(ByteFifo& q, SimTime now) {
    DequeueResult r;
    bool ok_to_drop = false;
    std::optional<Packet> p = do_dequeue(q, now, ok_to_drop);
    if (!p) {
      s_.dropping = false;
      return r;
    }

    if (s_.dropping) {
      if (!ok_to_drop) {
        s_.dropping = false;
      } else {
        while (p && s_.dropping && now >= s_.drop_next) {
          ++s_.count;
          if (is_ect(p->ecn)) {
            p->mark_ce();
            r.marked = true;
            s_.drop_next = codel_control_law(s_.drop_next, s_.count, interval_);
            break;
          }
          r.dropped.push_back(std::move(*p));
          p = do_dequeue(q, now, ok_to_drop);
          if (!ok_to_drop)
            s_.dropping = false;
          else
            s_.drop_next = codel_control_law(s_.drop_next, s_.count, interval_);
        }
      }
    } else if (ok_to_drop) {
      if (is_ect(p->ecn)) {
        p->mark_ce();
        r.marked = true;
      } else {
        r.dropped.push_back(std::move(*p));
        p = do_dequeue(q, now, ok_to_drop);
      }
      s_.dropping = true;
      const std::uint32_t delta = s_.count - s_.last_count;
      if (delta > 1 && now < s_.drop_next + interval_ * 16)
        s_.count = delta;
      else
        s_.count = 1;
      s_.drop_next = codel_control_law(now, s_.count, interval_);
      s_.last_count = s_.count;
    }
    r.packet = std::move(p);
    return r;
  }

  const CodelState& state() const { return s_; }

 private:
  std::optional<Packet> do_dequeue(ByteFifo& q, SimTime now, bool& ok_to_drop) {
    ok_to_drop = false;
    if (q.empty()) {
      s_.first_above_time = SimTime{};
      return std::nullopt;
    }
    Packet p = q.pop();
    const SimTime sojourn = now - p.enqueued_at;
    if (sojourn < target_ || q.bytes() <= kMss) {
      s_.first_above_time = SimTime{};
    } else if (s_.first_above_time == SimTime{}) {
      s_.first_above_time = now + interval_;
    } else if (now >= s_.first_above_time) {
      ok_to_drop = true;
    }
    return p;
  }

  SimTime target_;
  SimTime interval_;
  CodelState s_;
};

class Codel final : public QueueDiscipline {
 public:
  explicit Codel(QueueConfig cfg) : QueueDiscipline(cfg), core_(cfg.codel_target, cfg.codel_interval) {}

  EnqueueVerdict enqueue(Packet pkt, SimTime now) override {
    if (q_.bytes() + pkt.size > cfg_.buffer_limit) {
      note_rejected(pkt);
      return {Verdict::Drop, false, {}};
    }
    pkt.enqueued_at = now;
    const auto size = pkt.size;
    q_.push(std::move(pkt));
    note_enqueue(size);
    return {};
  }

  DequeueResult dequeue(SimTime now) override {
    DequeueResult r = core_.dequeue(q_, now);
    for (const auto& d : r.dropped) note_aqm_drop(d);
    if (r.marked) note_mark();
    if (r.packet) note_delivery(*r.packet);
    return r;
  }

  std::uint64_t bytes() const override { return q_.bytes(); }
  std::size_t packets() const override { return q_.size(); }
  const CodelState& state() const { return core_.state(); }

 private:
  ByteFifo q_;
  CodelCore core_;
};

}  // namespace l4sim::aqm
