#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "l4sim/aqm/aqm.hpp"
#include "l4sim/cc/receiver.hpp"
#include "l4sim/core/event_queue.hpp"
#include "l4sim/core/link.hpp"
#include "l4sim/core/rng.hpp"
#include "l4sim/harness/metrics.hpp"
#include "l4sim/harness/scenario.hpp"

namespace l4sim {

class SimulationDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TimeseriesSample {
  SimTime t;
  std::uint32_t flow = 0;
  double throughput_mbps = 0.0;  // goodput over the preceding period
  double srtt_ms = 0.0;
  double qdelay_ms = 0.0;  // mean bottleneck sojourn of packets dequeued in the period
};

// Raw per-flow counters kept by the simulation.
struct FlowCounters {
  std::uint64_t sent_packets = 0;
  std::uint64_t retransmits = 0;
  std::uint64_t received_packets = 0;  // at the receiver, duplicates included
  std::uint64_t unique_bytes = 0;      // payload bytes delivered once each (goodput)
  std::uint64_t dropped_packets = 0;   // at the bottleneck
  std::uint64_t ce_received = 0;
  std::uint64_t ce_on_not_ect = 0;  // must stay zero
  std::uint64_t dequeued_packets = 0;
  double sojourn_sum_s = 0.0;
  std::uint64_t rtt_samples = 0;
  double rtt_sum_s = 0.0;
  std::uint64_t rtos = 0;
  std::uint64_t in_network = 0;
};

// Fig. 2 dumbbell: per-flow sender -> access link (1 Gb/s, base_rtt/2
// propagation) -> bottleneck queue -> bottleneck link -> receiver; ACKs return
// over a pure delay of base_rtt/2.
class Dumbbell {
 public:
  Dumbbell(const Scenario& s, std::uint64_t seed) : s_(s), seed_(seed), rng_(seed) {
    s_.validate();
    aqm::QueueConfig qc = s_.queue;
    qc.buffer_limit = s_.buffer_bytes();
    queue_ = aqm::make_queue(qc);
    bottleneck_ = Link(s_.bottleneck_rate_bps, SimTime{});
    const SimTime half = SimTime::ns(s_.base_rtt.count() / 2);
    ack_delay_ = s_.base_rtt - half;
    for (std::uint32_t i = 0; i < s_.flows.size(); ++i) {
      auto f = std::make_unique<Flow>();
      f->id = i;
      f->spec = s_.flows[i];
      f->cc = make_controller(f->spec, rng_.fork(100 + i).next_u64());
      f->rx = std::make_unique<cc::Receiver>(f->cc->feedback_mode());
      f->access = Link(s_.access_rate_bps, half);
      f->decision = f->cc->decision();
      const SimTime jitter = SimTime::ns(static_cast<std::int64_t>(
          rng_.fork(200 + i).below(static_cast<std::uint64_t>(std::max<std::int64_t>(s_.jitter().count(), 1)))));
      f->start = f->spec.start_at + jitter;
      flows_.push_back(std::move(f));
    }
    for (auto& f : flows_) events_.schedule(f->start, Ev{EvKind::Start, f->id, {}});
    if (auto iv = queue_->timer_interval()) events_.schedule(*iv, Ev{EvKind::QueueTimer, 0, {}});
    if (s_.sample_period) events_.schedule(*s_.sample_period, Ev{EvKind::Sample, 0, {}});
  }

  // Advances the simulation to `until`.
  void run(SimTime until) {
    events_.run_until(until, [this](SimTime now, Ev& ev) { dispatch(now, ev); });
    if (events_.now() < until) events_.advance_to(until);
    horizon_ = until;
  }

  // Stops all senders and timers, then delivers everything still in flight.
  void drain() {
    draining_ = true;
    events_.run_until(SimTime::max(), [this](SimTime now, Ev& ev) { dispatch(now, ev); });
  }

  std::vector<FlowMetrics> metrics() const {
    const double dur = horizon_.seconds();
    std::vector<FlowMetrics> out;
    for (const auto& f : flows_) {
      FlowMetrics m;
      const auto& c = f->counters;
      m.throughput_mbps = dur > 0.0 ? static_cast<double>(c.unique_bytes) * 8.0 / dur / 1e6 : 0.0;
      m.mean_rtt_ms = c.rtt_samples ? c.rtt_sum_s / static_cast<double>(c.rtt_samples) * 1e3 : 0.0;
      m.mean_qdelay_ms = c.dequeued_packets ? c.sojourn_sum_s / static_cast<double>(c.dequeued_packets) * 1e3 : 0.0;
      m.p99_qdelay_ms = percentile_ms(f->sojourn_ns, 0.99);
      m.marks = static_cast<double>(c.ce_received);
      m.drops = static_cast<double>(c.dropped_packets);
      out.push_back(m);
    }
    assign_shares(out);
    return out;
  }

  const FlowCounters& counters(std::size_t flow) const { return flows_.at(flow)->counters; }
  const cc::CongestionController& controller(std::size_t flow) const { return *flows_.at(flow)->cc; }
  const aqm::QueueDiscipline& queue() const { return *queue_; }
  const std::vector<TimeseriesSample>& timeseries() const { return samples_; }
  std::uint64_t events_dispatched() const { return events_.dispatched(); }
  SimTime now() const { return events_.now(); }
  std::size_t flow_count() const { return flows_.size(); }
  std::uint64_t seed() const { return seed_; }

  // Optional per-packet observer on bottleneck departures (tests).
  std::function<void(const Packet&, SimTime)> on_departure;

 private:
  enum class EvKind : std::uint8_t { Start, SendTimer, RouterArrival, TxDone, AckArrival, Rto, QueueTimer, Sample };

  struct Ev {
    EvKind kind;
    std::uint32_t flow;
    std::uint32_t slot;  // index into the packet pool, when the event carries a packet
  };

  struct TxRecord {
    std::uint64_t seq = 0;
    SimTime sent_at{};
    std::uint64_t delivered_at_send = 0;
    SimTime delivered_time_at_send{};
    SimTime first_sent_at_send{};
    bool delivered = false;
    bool lost = false;
  };

  struct Suspect {
    std::uint64_t tx = 0;
    std::uint64_t delivered_mark = 0;
  };

  struct Flow {
    std::uint32_t id = 0;
    FlowSpec spec;
    std::unique_ptr<cc::CongestionController> cc;
    std::unique_ptr<cc::Receiver> rx;
    Link access;
    cc::CcDecision decision;
    SimTime start{};
    bool started = false;

    std::deque<TxRecord> txs;
    std::uint64_t tx_base = 0;
    std::uint64_t next_tx = 0;
    std::uint64_t next_seq = 0;
    std::uint64_t scan_tx = 0;
    std::deque<Suspect> suspects;
    std::deque<std::uint64_t> retx;
    std::uint32_t inflight = 0;

    std::vector<bool> seq_acked;     // sender view
    std::vector<bool> seq_received;  // receiver view

    std::uint64_t delivered = 0;
    SimTime delivered_time{};
    SimTime first_sent_time{};

    SimTime srtt{};
    SimTime last_progress{};
    std::uint32_t rto_backoff = 0;
    bool rto_pending = false;
    SimTime next_send{};
    bool send_timer_pending = false;
    bool cwr_pending = false;

    FlowCounters counters;
    std::vector<std::uint32_t> sojourn_ns;

    std::uint64_t period_bytes = 0;
    std::uint64_t period_dequeued = 0;
    double period_sojourn_s = 0.0;
  };

  static double percentile_ms(std::vector<std::uint32_t> v, double q) {
    if (v.empty()) return 0.0;
    const auto k = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1));
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    return static_cast<double>(v[k]) / 1e6;
  }

  std::uint32_t park(Packet p) {
    if (free_slots_.empty()) {
      pool_.push_back(std::move(p));
      return static_cast<std::uint32_t>(pool_.size() - 1);
    }
    const std::uint32_t slot = free_slots_.back();
    free_slots_.pop_back();
    pool_[slot] = std::move(p);
    return slot;
  }

  Packet take(std::uint32_t slot) {
    free_slots_.push_back(slot);
    return std::move(pool_[slot]);
  }

  void schedule(SimTime at, Ev ev) {
    if (events_.pending() >= s_.max_pending_events)
      throw SimulationDiverged("event queue exceeded " + std::to_string(s_.max_pending_events) + " pending events");
    events_.schedule(at, std::move(ev));
  }

  void dispatch(SimTime now, Ev& ev) {
    switch (ev.kind) {
      case EvKind::Start: {
        Flow& f = *flows_[ev.flow];
        f.started = true;
        f.last_progress = now;
        f.next_send = now;
        try_send(f, now);
        break;
      }
      case EvKind::SendTimer: {
        Flow& f = *flows_[ev.flow];
        f.send_timer_pending = false;
        try_send(f, now);
        break;
      }
      case EvKind::RouterArrival: on_router_arrival(take(ev.slot), now); break;
      case EvKind::TxDone: on_tx_done(take(ev.slot), now); break;
      case EvKind::AckArrival: on_ack(*flows_[ev.flow], take(ev.slot), now); break;
      case EvKind::Rto: on_rto_timer(*flows_[ev.flow], now); break;
      case EvKind::QueueTimer:
        queue_->on_timer(now);
        if (!draining_) schedule(now + *queue_->timer_interval(), Ev{EvKind::QueueTimer, 0, {}});
        break;
      case EvKind::Sample: take_sample(now); break;
    }
  }

  // Sender

  static SimTime rto_base(const Flow& f) {
    if (f.srtt == SimTime{}) return SimTime::sec(1);
    return std::max(SimTime::ms(200), f.srtt * 4);
  }

  SimTime rto_deadline(const Flow& f) const {
    SimTime rto = rto_base(f);
    for (std::uint32_t i = 0; i < f.rto_backoff && rto < SimTime::sec(60); ++i) rto = rto * 2;
    return f.last_progress + rto;
  }

  void arm_rto(Flow& f) {
    if (f.rto_pending || f.inflight == 0 || draining_) return;
    f.rto_pending = true;
    schedule(rto_deadline(f), Ev{EvKind::Rto, f.id, {}});
  }

  void try_send(Flow& f, SimTime now) {
    if (!f.started || draining_) return;
    while (f.inflight < f.decision.applied_cwnd()) {
      if (f.decision.pacing_rate_bps && now < f.next_send) {
        if (!f.send_timer_pending) {
          f.send_timer_pending = true;
          schedule(f.next_send, Ev{EvKind::SendTimer, f.id, {}});
        }
        break;
      }
      std::uint64_t seq = 0;
      bool retransmit = false;
      while (!f.retx.empty() && seq_flag(f.seq_acked, f.retx.front())) f.retx.pop_front();
      if (!f.retx.empty()) {
        seq = f.retx.front();
        f.retx.pop_front();
        retransmit = true;
      } else {
        seq = f.next_seq++;
      }
      send_packet(f, seq, now);
      if (retransmit) ++f.counters.retransmits;
      if (f.decision.pacing_rate_bps) {
        const double rate = std::max(*f.decision.pacing_rate_bps, 1e4);
        const SimTime gap = SimTime::ns(static_cast<std::int64_t>(kMss * 8.0 / rate * 1e9 + 0.5));
        f.next_send = std::max(now, f.next_send) + gap;
      }
    }
    arm_rto(f);
  }

  void send_packet(Flow& f, std::uint64_t seq, SimTime now) {
    if (f.inflight == 0) {
      f.first_sent_time = now;
      f.delivered_time = now;
    }
    TxRecord rec;
    rec.seq = seq;
    rec.sent_at = now;
    rec.delivered_at_send = f.delivered;
    rec.delivered_time_at_send = f.delivered_time;
    rec.first_sent_at_send = f.first_sent_time;
    f.txs.push_back(rec);

    Packet p;
    p.id = next_packet_id_++;
    p.flow_id = f.id;
    p.size = kMss;
    p.ecn = f.decision.ect_codepoint;
    p.seq = seq;
    p.tx_index = f.next_tx++;
    p.sent_at = now;
    p.cwr = f.cwr_pending;
    f.cwr_pending = false;
    ++f.inflight;
    ++f.counters.sent_packets;
    ++f.counters.in_network;
    const SimTime arrival = f.access.transmit(p, now);
    schedule(arrival, Ev{EvKind::RouterArrival, f.id, park(std::move(p))});
  }

  static bool seq_flag(const std::vector<bool>& v, std::uint64_t seq) { return seq < v.size() && v[seq]; }
  static bool set_seq_flag(std::vector<bool>& v, std::uint64_t seq) {
    if (seq >= v.size()) v.resize(std::max<std::size_t>(seq + 1, v.size() * 2), false);
    const bool was = v[seq];
    v[seq] = true;
    return !was;
  }

  TxRecord* record(Flow& f, std::uint64_t tx) {
    if (tx < f.tx_base || tx >= f.tx_base + f.txs.size()) return nullptr;
    return &f.txs[tx - f.tx_base];
  }

  void on_ack(Flow& f, const Packet& ack, SimTime now) {
    TxRecord* rec = record(f, ack.tx_index);
    if (!rec || rec->delivered) return;
    const SimTime rtt = now - ack.sent_at;
    ++f.counters.rtt_samples;
    f.counters.rtt_sum_s += rtt.seconds();
    f.srtt = f.srtt == SimTime{} ? rtt : SimTime::ns((7 * f.srtt.count() + rtt.count()) / 8);
    f.last_progress = now;
    f.rto_backoff = 0;

    const std::uint32_t prior_inflight = f.inflight;
    rec->delivered = true;
    if (!rec->lost) --f.inflight;
    set_seq_flag(f.seq_acked, rec->seq);

    ++f.delivered;
    f.delivered_time = now;
    f.first_sent_time = rec->sent_at;
    double rate = 0.0;
    const SimTime send_elapsed = rec->sent_at - rec->first_sent_at_send;
    const SimTime ack_elapsed = now - rec->delivered_time_at_send;
    const SimTime interval = std::max(send_elapsed, ack_elapsed);
    if (interval > SimTime{})
      rate = static_cast<double>(f.delivered - rec->delivered_at_send) * kMss * 8.0 / interval.seconds();

    AckFeedback fb = *ack.ack_info;
    fb.rtt_sample = rtt;
    fb.acked_tx = ack.tx_index;
    fb.next_tx = f.next_tx;
    fb.prior_inflight = prior_inflight;
    fb.delivery_rate_bps = rate;

    const std::uint64_t cuts_before = f.cc->reductions();
    f.decision = f.cc->on_ack(fb, now);
    if (fb.ece && f.cc->reductions() > cuts_before) f.cwr_pending = true;

    detect_losses(f, ack.tx_index, now);
    while (!f.txs.empty() && (f.txs.front().delivered || f.txs.front().lost)) {
      f.txs.pop_front();
      ++f.tx_base;
    }
    try_send(f, now);
  }

  // Loss inference: the network never reorders, so a transmission is lost once
  // three later transmissions have been delivered.
  void detect_losses(Flow& f, std::uint64_t acked_tx, SimTime now) {
    for (std::uint64_t t = std::max(f.scan_tx, f.tx_base); t < acked_tx; ++t) {
      TxRecord* r = record(f, t);
      if (r && !r->delivered && !r->lost) f.suspects.push_back({t, f.delivered - 1});
    }
    f.scan_tx = std::max(f.scan_tx, acked_tx + 1);
    while (!f.suspects.empty() && f.delivered - f.suspects.front().delivered_mark >= 3) {
      const std::uint64_t t = f.suspects.front().tx;
      f.suspects.pop_front();
      TxRecord* r = record(f, t);
      if (!r || r->delivered || r->lost) continue;
      r->lost = true;
      --f.inflight;
      f.retx.push_back(r->seq);
      f.decision = f.cc->on_loss(t, f.next_tx, now);
    }
  }

  void on_rto_timer(Flow& f, SimTime now) {
    f.rto_pending = false;
    if (draining_ || f.inflight == 0) return;
    const SimTime deadline = rto_deadline(f);
    if (now < deadline) {
      f.rto_pending = true;
      schedule(deadline, Ev{EvKind::Rto, f.id, {}});
      return;
    }
    ++f.counters.rtos;
    std::vector<std::uint64_t> lost;
    for (auto& r : f.txs) {
      if (r.delivered || r.lost) continue;
      r.lost = true;
      lost.push_back(r.seq);
    }
    std::sort(lost.begin(), lost.end());
    for (auto it = lost.rbegin(); it != lost.rend(); ++it) f.retx.push_front(*it);
    f.inflight = 0;
    f.suspects.clear();
    f.scan_tx = f.next_tx;
    ++f.rto_backoff;
    f.last_progress = now;
    f.decision = f.cc->on_rto(f.next_tx, now);
    f.next_send = now;
    try_send(f, now);
  }

  // Router and bottleneck

  void on_router_arrival(Packet p, SimTime now) {
    Flow& f = *flows_[p.flow_id];
    auto v = queue_->enqueue(std::move(p), now);
    for (auto& e : v.evicted) note_drop(e);
    if (v.verdict == aqm::Verdict::Drop) {
      ++f.counters.dropped_packets;
      --f.counters.in_network;
    }
    if (!tx_busy_) start_transmission(now);
  }

  void note_drop(const Packet& p) {
    Flow& f = *flows_[p.flow_id];
    ++f.counters.dropped_packets;
    --f.counters.in_network;
  }

  void start_transmission(SimTime now) {
    auto r = queue_->dequeue(now);
    for (auto& d : r.dropped) note_drop(d);
    if (!r.packet) return;
    Packet& p = *r.packet;
    Flow& f = *flows_[p.flow_id];
    const SimTime sojourn = now - p.enqueued_at;
    ++f.counters.dequeued_packets;
    f.counters.sojourn_sum_s += sojourn.seconds();
    f.sojourn_ns.push_back(static_cast<std::uint32_t>(std::min<std::int64_t>(sojourn.count(), UINT32_MAX)));
    ++f.period_dequeued;
    f.period_sojourn_s += sojourn.seconds();
    if (on_departure) on_departure(p, now);
    tx_busy_ = true;
    const SimTime done = bottleneck_.transmit(p, now);
    schedule(done, Ev{EvKind::TxDone, p.flow_id, park(std::move(p))});
  }

  void on_tx_done(Packet p, SimTime now) {
    tx_busy_ = false;
    Flow& f = *flows_[p.flow_id];
    --f.counters.in_network;
    ++f.counters.received_packets;
    if (p.ecn == Ecn::CE) ++f.counters.ce_received;
    if (set_seq_flag(f.seq_received, p.seq)) {
      f.counters.unique_bytes += payload_bytes(p.size);
      f.period_bytes += payload_bytes(p.size);
    }
    Packet ack;
    ack.id = next_packet_id_++;
    ack.flow_id = p.flow_id;
    ack.size = 64;
    ack.is_ack = true;
    ack.seq = p.seq;
    ack.tx_index = p.tx_index;
    ack.sent_at = p.sent_at;
    ack.ack_info = f.rx->on_data(p);
    schedule(now + ack_delay_, Ev{EvKind::AckArrival, f.id, park(std::move(ack))});
    if (!queue_->empty()) start_transmission(now);
  }

  void take_sample(SimTime now) {
    const double period = s_.sample_period->seconds();
    for (auto& fp : flows_) {
      Flow& f = *fp;
      TimeseriesSample ts;
      ts.t = now;
      ts.flow = f.id;
      ts.throughput_mbps = static_cast<double>(f.period_bytes) * 8.0 / period / 1e6;
      ts.srtt_ms = f.srtt.seconds() * 1e3;
      ts.qdelay_ms = f.period_dequeued ? f.period_sojourn_s / static_cast<double>(f.period_dequeued) * 1e3 : 0.0;
      samples_.push_back(ts);
      f.period_bytes = 0;
      f.period_dequeued = 0;
      f.period_sojourn_s = 0.0;
    }
    if (!draining_) schedule(now + *s_.sample_period, Ev{EvKind::Sample, 0, {}});
  }

  Scenario s_;
  std::uint64_t seed_;
  SeededRng rng_;
  EventQueue<Ev> events_;
  std::unique_ptr<aqm::QueueDiscipline> queue_;
  Link bottleneck_;
  SimTime ack_delay_{};
  bool tx_busy_ = false;
  bool draining_ = false;
  SimTime horizon_{};
  std::uint64_t next_packet_id_ = 1;
  std::vector<std::unique_ptr<Flow>> flows_;
  std::vector<TimeseriesSample> samples_;
  std::vector<Packet> pool_;
  std::vector<std::uint32_t> free_slots_;
};

inline Dumbbell build_dumbbell(const Scenario& s, std::uint64_t seed) { return Dumbbell(s, seed); }

}  // namespace l4sim
