#pragma once

#include <algorithm>
#include <list>
#include <map>
#include <optional>

#include "l4sim/aqm/codel.hpp"
#include "l4sim/aqm/queue_discipline.hpp"

namespace l4sim::aqm {

// Per-flow fair queuing with deficit round robin. Sub-queues are indexed
// directly by flow id. Each sub-queue runs its own AQM: a sojourn threshold
// marker (FQ) or a full CoDel instance (FQ-CoDel). The buffer limit is shared;
// on overflow the head of the longest sub-queue is evicted, which keeps a
// non-responsive flow from occupying the whole buffer.
class FairQueue final : public QueueDiscipline {
 public:
  FairQueue(QueueConfig cfg, bool codel_per_flow) : QueueDiscipline(cfg), codel_(codel_per_flow) {}

  EnqueueVerdict enqueue(Packet pkt, SimTime now) override {
    EnqueueVerdict v;
    Flow& arriving = flow(pkt.flow_id);
    while (bytes_ + pkt.size > cfg_.buffer_limit) {
      Flow* fattest = &arriving;
      for (auto& [id, f] : flows_)
        if (f.q.bytes() > fattest->q.bytes()) fattest = &f;
      if (fattest == &arriving || fattest->q.empty()) {
        note_rejected(pkt);
        v.verdict = Verdict::Drop;
        return v;
      }
      Packet out = fattest->q.pop();
      bytes_ -= out.size;
      --packets_;
      note_tail_drop(out);
      v.evicted.push_back(std::move(out));
      if (fattest->q.empty()) deactivate(*fattest);
    }
    pkt.enqueued_at = now;
    const auto size = pkt.size;
    arriving.q.push(std::move(pkt));
    bytes_ += size;
    ++packets_;
    if (!arriving.active) {
      arriving.active = true;
      arriving.deficit = static_cast<std::int64_t>(cfg_.fq_quantum);
      active_.push_back(&arriving);
    }
    note_enqueue(size);
    return v;
  }

  DequeueResult dequeue(SimTime now) override {
    DequeueResult r;
    while (!active_.empty()) {
      Flow* f = active_.front();
      if (f->deficit <= 0) {
        f->deficit += static_cast<std::int64_t>(cfg_.fq_quantum);
        active_.splice(active_.end(), active_, active_.begin());
        continue;
      }
      DequeueResult sub = dequeue_from(*f, now);
      for (auto& d : sub.dropped) {
        bytes_ -= d.size;
        --packets_;
        note_aqm_drop(d);
        r.dropped.push_back(std::move(d));
      }
      if (!sub.packet) {
        deactivate(*f);
        continue;
      }
      bytes_ -= sub.packet->size;
      --packets_;
      f->deficit -= static_cast<std::int64_t>(sub.packet->size);
      if (f->q.empty()) deactivate(*f);
      if (sub.marked) note_mark();
      note_delivery(*sub.packet);
      r.packet = std::move(sub.packet);
      r.marked = sub.marked;
      return r;
    }
    return r;
  }

  std::uint64_t bytes() const override { return bytes_; }
  std::size_t packets() const override { return packets_; }

  std::uint64_t flow_bytes(std::uint32_t flow_id) const {
    auto it = flows_.find(flow_id);
    return it == flows_.end() ? 0 : it->second.q.bytes();
  }

 private:
  struct Flow {
    explicit Flow(const QueueConfig& c) : codel(c.codel_target, c.codel_interval) {}
    ByteFifo q;
    CodelCore codel;
    std::int64_t deficit = 0;
    bool active = false;
  };

  Flow& flow(std::uint32_t id) {
    auto it = flows_.find(id);
    if (it == flows_.end()) it = flows_.emplace(id, Flow(cfg_)).first;
    return it->second;
  }

  void deactivate(Flow& f) {
    if (!f.active) return;
    f.active = false;
    active_.remove(&f);
  }

  DequeueResult dequeue_from(Flow& f, SimTime now) {
    if (codel_) return f.codel.dequeue(f.q, now);
    DequeueResult r;
    if (f.q.empty()) return r;
    Packet p = f.q.pop();
    if (is_ect(p.ecn) && now - p.enqueued_at > cfg_.ecn_threshold) {
      p.mark_ce();
      r.marked = true;
    }
    r.packet = std::move(p);
    return r;
  }

  bool codel_;
  std::map<std::uint32_t, Flow> flows_;
  std::list<Flow*> active_;
  std::uint64_t bytes_ = 0;
  std::size_t packets_ = 0;
};

}  // namespace l4sim::aqm
