#pragma once

#include <cstdint>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

#include "l4sim/core/sim_time.hpp"

namespace l4sim {

// Deterministic discrete-event kernel. Events with equal timestamps dispatch
// in scheduling order (ordinal from a per-queue counter).
template <typename Payload>
class EventQueue {
 public:
  struct Event {
    SimTime at;
    std::uint64_t ordinal;
    Payload payload;
  };

  SimTime now() const { return now_; }
  std::size_t pending() const { return heap_.size(); }
  bool empty() const { return heap_.empty(); }
  std::uint64_t dispatched() const { return dispatched_; }

  // Scheduling in the past is a logic error.
  std::uint64_t schedule(SimTime at, Payload payload) {
    if (at < now_) throw std::logic_error("EventQueue::schedule: event in the past");
    const std::uint64_t ord = next_ordinal_++;
    heap_.push(Event{at, ord, std::move(payload)});
    return ord;
  }

  // Dispatches every event with at <= deadline, in (at, ordinal) order. The
  // handler may schedule further events. On return the clock equals the
  // deadline if any event remained beyond it, otherwise the time of the last
  // dispatched event (unchanged for an empty queue).
  template <typename Handler>
  void run_until(SimTime deadline, Handler&& handler) {
    while (!heap_.empty()) {
      if (heap_.top().at > deadline) {
        now_ = deadline;
        return;
      }
      Event ev = std::move(const_cast<Event&>(heap_.top()));
      heap_.pop();
      now_ = ev.at;
      ++dispatched_;
      handler(now_, ev.payload);
    }
  }

  // Moves the clock forward without dispatching (only when nothing is due earlier).
  void advance_to(SimTime t) {
    if (t < now_) throw std::logic_error("EventQueue::advance_to: time moves backwards");
    if (!heap_.empty() && heap_.top().at < t) throw std::logic_error("EventQueue::advance_to: skips events");
    now_ = t;
  }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.ordinal > b.ordinal;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  SimTime now_{};
  std::uint64_t next_ordinal_ = 0;
  std::uint64_t dispatched_ = 0;
};

}  // namespace l4sim
