#pragma once

#include "l4sim/aqm/queue_discipline.hpp"

namespace l4sim::aqm {

// Drop-tail FIFO. With `ecn_threshold` set, ECN-capable packets whose
// sojourn exceeds the threshold are CE-marked at dequeue; NotECT packets are
// only ever tail-dropped.
class Fifo final : public QueueDiscipline {
 public:
  explicit Fifo(QueueConfig cfg, bool threshold_marking)
      : QueueDiscipline(cfg), marking_(threshold_marking) {}

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
    DequeueResult r;
    if (q_.empty()) return r;
    Packet p = q_.pop();
    if (marking_ && is_ect(p.ecn) && now - p.enqueued_at > cfg_.ecn_threshold) {
      p.mark_ce();
      note_mark();
      r.marked = true;
    }
    note_delivery(p);
    r.packet = std::move(p);
    return r;
  }

  std::uint64_t bytes() const override { return q_.bytes(); }
  std::size_t packets() const override { return q_.size(); }

 private:
  ByteFifo q_;
  bool marking_;
};

}  // namespace l4sim::aqm
