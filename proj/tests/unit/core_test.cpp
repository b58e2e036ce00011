#include <gtest/gtest.h>

#include <vector>

#include "l4sim/core/event_queue.hpp"
#include "l4sim/core/link.hpp"
#include "l4sim/core/packet.hpp"
#include "l4sim/core/rng.hpp"
#include "l4sim/core/sim_time.hpp"

using namespace l4sim;

TEST(SimTime, UnitConversions) {
  EXPECT_EQ(SimTime::ms(5).count(), 5'000'000u);
  EXPECT_EQ(SimTime::sec(60), SimTime::ms(60'000));
  EXPECT_EQ(SimTime::from_ms(0.12), SimTime::us(120));
  EXPECT_DOUBLE_EQ(SimTime::ms(25).seconds(), 0.025);
  EXPECT_THROW(SimTime::from_seconds(-1.0), std::out_of_range);
  EXPECT_THROW(SimTime::max() + SimTime::ns(1), std::overflow_error);
}

TEST(SimTime, SerializationTime) {
  EXPECT_EQ(serialization_time(1500, 100'000'000), SimTime::us(120));
  EXPECT_EQ(serialization_time(1500, 1'000'000'000), SimTime::us(12));
  EXPECT_THROW(serialization_time(1500, 0), std::invalid_argument);
}

TEST(EventQueue, TiesDispatchInOrdinalOrder) {
  EventQueue<int> q;
  q.schedule(SimTime::ms(5), 1);
  q.schedule(SimTime::ms(5), 2);
  std::vector<int> seen;
  q.run_until(SimTime::ms(10), [&](SimTime, int& v) { seen.push_back(v); });
  EXPECT_EQ(seen, (std::vector<int>{1, 2}));
}

TEST(EventQueue, DispatchesInTimeOrder) {
  EventQueue<int> q;
  q.schedule(SimTime::ms(1), 1);
  q.schedule(SimTime::ms(3), 3);
  q.schedule(SimTime::ms(2), 2);
  std::vector<SimTime> at;
  q.run_until(SimTime::ms(10), [&](SimTime now, int&) { at.push_back(now); });
  EXPECT_EQ(at, (std::vector<SimTime>{SimTime::ms(1), SimTime::ms(2), SimTime::ms(3)}));
}

TEST(EventQueue, ZeroTimeEventRunsAtZero) {
  EventQueue<int> q;
  q.schedule(SimTime{}, 7);
  q.schedule(SimTime::ns(1), 8);
  std::vector<int> seen;
  q.run_until(SimTime{}, [&](SimTime now, int& v) {
    EXPECT_EQ(now, SimTime{});
    seen.push_back(v);
  });
  EXPECT_EQ(seen, std::vector<int>{7});
  EXPECT_EQ(q.pending(), 1u);
}

TEST(EventQueue, EmptyQueueLeavesClock) {
  EventQueue<int> q;
  q.run_until(SimTime::sec(1), [](SimTime, int&) {});
  EXPECT_EQ(q.now(), SimTime{});
}

TEST(EventQueue, HorizonReachedWithPendingEvent) {
  EventQueue<int> q;
  q.schedule(SimTime::ms(59'900), 1);
  q.schedule(SimTime::ms(60'100), 2);
  q.run_until(SimTime::sec(60), [](SimTime, int&) {});
  EXPECT_EQ(q.now(), SimTime::sec(60));
  EXPECT_EQ(q.dispatched(), 1u);
}

TEST(EventQueue, HandlerMaySchedule) {
  EventQueue<int> q;
  q.schedule(SimTime::ms(1), 0);
  int count = 0;
  q.run_until(SimTime::ms(100), [&](SimTime now, int& v) {
    ++count;
    if (v < 4) q.schedule(now + SimTime::ms(1), v + 1);
  });
  EXPECT_EQ(count, 5);
  EXPECT_THROW(q.schedule(SimTime{}, 0), std::logic_error);
}

TEST(Link, IdleLinkArrival) {
  Link l(100'000'000, SimTime::ms(5));
  Packet p;
  EXPECT_EQ(l.transmit(p, SimTime::ms(1)), SimTime::ms(1) + SimTime::us(120) + SimTime::ms(5));
}

TEST(Link, BackToBackPacketsAreSpacedBySerialization) {
  Link l(100'000'000, SimTime::ms(5));
  Packet p;
  const SimTime a = l.transmit(p, SimTime{});
  const SimTime b = l.transmit(p, SimTime::us(10));
  EXPECT_EQ(b - a, SimTime::us(120));
}

TEST(Link, AccessLink) {
  Link l(1'000'000'000, SimTime{});
  Packet p;
  EXPECT_EQ(link_transmit(l, p, SimTime{}), SimTime::us(12));
}

TEST(Packet, CodepointTransitions) {
  Packet p;
  p.ecn = Ecn::ECT0;
  p.mark_ce();
  EXPECT_EQ(p.ecn, Ecn::CE);
  p.mark_ce();
  EXPECT_EQ(p.ecn, Ecn::CE);
  Packet n;
  EXPECT_THROW(n.mark_ce(), std::logic_error);
  EXPECT_EQ(payload_bytes(kMss), 1448u);
}

TEST(SeededRng, ReproducibleAndForked) {
  SeededRng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  SeededRng c(42);
  auto f1 = c.fork(1), f2 = c.fork(2), f1b = c.fork(1);
  EXPECT_EQ(f1.next_u64(), f1b.next_u64());
  EXPECT_NE(f1.next_u64(), f2.next_u64());
  SeededRng r(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(r.below(10), 10u);
  }
}
