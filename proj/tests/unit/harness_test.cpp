#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "l4sim/harness/runner.hpp"

using namespace l4sim;

namespace {

Scenario scenario(aqm::QueueKind q, std::vector<FlowSpec> flows, double bdp = 1.0, SimTime dur = SimTime::sec(5)) {
  Scenario s;
  s.queue.kind = q;
  s.flows = std::move(flows);
  s.buffer_bdp = bdp;
  s.duration = dur;
  return s;
}

FlowSpec flow(const char* label) { return *parse_flow_label(label); }

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

void expect_identical(const std::vector<FlowMetrics>& a, const std::vector<FlowMetrics>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(same_bits(a[i].throughput_mbps, b[i].throughput_mbps));
    EXPECT_TRUE(same_bits(a[i].mean_rtt_ms, b[i].mean_rtt_ms));
    EXPECT_TRUE(same_bits(a[i].mean_qdelay_ms, b[i].mean_qdelay_ms));
    EXPECT_TRUE(same_bits(a[i].p99_qdelay_ms, b[i].p99_qdelay_ms));
    EXPECT_TRUE(same_bits(a[i].share, b[i].share));
    EXPECT_EQ(a[i].marks, b[i].marks);
    EXPECT_EQ(a[i].drops, b[i].drops);
  }
}

const std::vector<std::vector<const char*>> kMixes = {
    {"prague", "cubic"}, {"prague-fb", "cubic-ecn"}, {"prague", "bbr1"}, {"prague", "bbr2"},
    {"prague", "bbr2-ecn"}, {"prague", "bbr2-accecn"}, {"reno", "reno-ecn"}};

const aqm::QueueKind kQueues[] = {aqm::QueueKind::Fifo, aqm::QueueKind::FifoEcn, aqm::QueueKind::Codel,
                                  aqm::QueueKind::Fq,   aqm::QueueKind::FqCodel, aqm::QueueKind::DualPi2};

}  // namespace

TEST(Metrics, JainIndex) {
  const double even[] = {50, 50};
  const double skew[] = {90, 10};
  const double starved[] = {42, 0};
  EXPECT_DOUBLE_EQ(jain_index(even), 1.0);
  EXPECT_NEAR(jain_index(skew), 100.0 * 100.0 / (2.0 * (90.0 * 90.0 + 10.0 * 10.0)), 1e-15);
  EXPECT_NEAR(jain_index(skew), 0.6098, 5e-5);
  EXPECT_DOUBLE_EQ(jain_index(starved), 0.5);
  EXPECT_THROW(jain_index(std::span<const double>{}), std::invalid_argument);
}

TEST(Metrics, AggregateMeanAndSampleStd) {
  auto trial = [](std::uint64_t seed, double thr) {
    TrialResult t;
    t.seed = seed;
    FlowMetrics m;
    m.throughput_mbps = thr;
    t.flows = {m};
    return t;
  };
  const auto two = aggregate({trial(1, 40), trial(2, 60)});
  EXPECT_DOUBLE_EQ(two.mean[0].throughput_mbps, 50.0);
  EXPECT_NEAR(two.stddev[0].throughput_mbps, std::sqrt(200.0), 1e-12);
  EXPECT_NEAR(two.stddev[0].throughput_mbps, 14.14, 5e-3);

  const auto one = aggregate({trial(1, 37.5)});
  EXPECT_DOUBLE_EQ(one.mean[0].throughput_mbps, 37.5);
  EXPECT_EQ(one.stddev[0].throughput_mbps, 0.0);

  std::vector<TrialResult> same;
  for (std::uint64_t i = 0; i < 10; ++i) same.push_back(trial(i, 12.25));
  EXPECT_EQ(aggregate(same).stddev[0].throughput_mbps, 0.0);
}

TEST(Scenario, BufferSizes) {
  Scenario s;
  EXPECT_EQ(s.buffer_bytes(), 125'000u);
  s.base_rtt = SimTime::ms(25);
  s.buffer_bdp = 2;
  EXPECT_EQ(s.buffer_bytes(), 625'000u);
  s.base_rtt = SimTime::ms(10);
  s.buffer_bdp = 0.5;
  EXPECT_EQ(s.buffer_bytes(), 62'500u);
}

TEST(Scenario, Validation) {
  Scenario s;
  s.flows = {};
  EXPECT_THROW(s.validate(), ScenarioError);
  s.flows = {flow("cubic"), flow("cubic"), flow("cubic")};
  EXPECT_THROW(s.validate(), ScenarioError);
  FlowSpec bad = FlowSpec::make(CcKind::Cubic, EcnMode::AccEcnL4S);
  EXPECT_THROW(bad.validate(), ScenarioError);
  EXPECT_FALSE(parse_flow_label("bbr1-ecn").has_value());
  EXPECT_FALSE(parse_flow_label("vegas").has_value());
  EXPECT_EQ(parse_flow_label("bbr2-accecn")->label(), "bbr2-accecn");
}

TEST(Dumbbell, CeOnlyOnEctAndCodepointDiscipline) {
  for (auto q : kQueues) {
    for (const auto& mix : kMixes) {
      Scenario s = scenario(q, {flow(mix[0]), flow(mix[1])}, 1.0, SimTime::sec(3));
      Dumbbell d(s, 1);
      std::vector<Ecn> sent_cp;
      for (const auto& f : s.flows) sent_cp.push_back(make_controller(f, 0)->decision().ect_codepoint);
      std::uint64_t violations = 0;
      d.on_departure = [&](const Packet& p, SimTime) {
        const Ecn base = sent_cp.at(p.flow_id);
        if (p.ecn != base && !(p.ecn == Ecn::CE && is_ect(base))) ++violations;
      };
      d.run(s.duration);
      EXPECT_EQ(violations, 0u) << s.describe();
      for (std::size_t i = 0; i < s.flows.size(); ++i) {
        EXPECT_EQ(d.counters(i).ce_on_not_ect, 0u) << s.describe();
        if (sent_cp[i] == Ecn::NotECT) {
          EXPECT_EQ(d.counters(i).ce_received, 0u) << s.describe();
        }
      }
    }
  }
}

TEST(Dumbbell, PacketAndByteConservation) {
  for (auto q : kQueues) {
    for (double bdp : {0.5, 2.0}) {
      Scenario s = scenario(q, {flow("prague"), flow("cubic")}, bdp, SimTime::sec(4));
      Dumbbell d(s, 3);
      d.run(s.duration);
      d.drain();
      for (std::size_t i = 0; i < 2; ++i) {
        const auto& c = d.counters(i);
        EXPECT_EQ(c.sent_packets, c.received_packets + c.dropped_packets) << s.describe();
        EXPECT_EQ(c.in_network, 0u) << s.describe();
      }
      const auto& st = d.queue().stats();
      EXPECT_EQ(st.offered_bytes, st.delivered_bytes + st.dropped_bytes) << s.describe();
      EXPECT_TRUE(d.queue().empty());
    }
  }
}

TEST(Dumbbell, DeterministicForRepeatedSeed) {
  for (const auto& mix : kMixes) {
    Scenario s = scenario(aqm::QueueKind::DualPi2, {flow(mix[0]), flow(mix[1])});
    Dumbbell a(s, 9), b(s, 9);
    a.run(s.duration);
    b.run(s.duration);
    EXPECT_EQ(a.events_dispatched(), b.events_dispatched());
    expect_identical(a.metrics(), b.metrics());
  }
}

TEST(Runner, DeterministicAcrossWorkerCounts) {
  Scenario s = scenario(aqm::QueueKind::FifoEcn, {flow("prague-fb"), flow("bbr2")});
  s.trials = 6;
  const auto one = run_scenario(s, 1);
  const auto many = run_scenario(s, 4);
  ASSERT_EQ(one.trials.size(), many.trials.size());
  for (std::size_t i = 0; i < one.trials.size(); ++i) {
    EXPECT_EQ(one.trials[i].seed, many.trials[i].seed);
    expect_identical(one.trials[i].flows, many.trials[i].flows);
  }
  expect_identical(one.mean, many.mean);
  expect_identical(one.stddev, many.stddev);
}

TEST(Runner, ParallelForRethrows) {
  EXPECT_THROW(parallel_for(8, 3,
                            [](std::size_t i) {
                              if (i == 5) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Dumbbell, SharesSumToOneAndRespectCapacity) {
  const double goodput_ceiling = 100.0 * kPayload / kMss;
  for (auto q : kQueues) {
    for (const auto& mix : kMixes) {
      Scenario s = scenario(q, {flow(mix[0]), flow(mix[1])});
      Dumbbell d(s, 2);
      d.run(s.duration);
      const auto m = d.metrics();
      EXPECT_NEAR(m[0].share + m[1].share, 1.0, 1e-12);
      EXPECT_LE(m[0].throughput_mbps + m[1].throughput_mbps, goodput_ceiling * 1.001) << s.describe();
    }
  }
}

// Per-ACK RTT minus the fixed path delay should match the per-packet sojourn.
TEST(Dumbbell, QueueDelayConsistentWithRtt) {
  for (const char* cc : {"cubic", "reno", "cubic-ecn"}) {
    Scenario s = scenario(aqm::QueueKind::Fifo, {flow(cc)}, 2.0, SimTime::sec(20));
    Dumbbell d(s, 1);
    d.run(s.duration);
    const auto m = d.metrics()[0];
    const double fixed_ms = s.base_rtt.millis() + serialization_time(kMss, s.bottleneck_rate_bps).millis() +
                            serialization_time(kMss, s.access_rate_bps).millis();
    ASSERT_GT(m.mean_qdelay_ms, 1.0) << cc;
    EXPECT_NEAR(m.mean_rtt_ms - fixed_ms, m.mean_qdelay_ms, 0.05 * m.mean_qdelay_ms) << cc;
  }
}

TEST(Dumbbell, SingleFlowSaturatesLink) {
  Scenario s = scenario(aqm::QueueKind::Fifo, {flow("cubic")}, 1.0, SimTime::sec(20));
  const auto m = run_trial(s, 1).flows[0];
  EXPECT_GT(m.throughput_mbps, 85.0);
  EXPECT_DOUBLE_EQ(m.share, 1.0);
}

TEST(Timeseries, SampleCountAndConservation) {
  Scenario s = scenario(aqm::QueueKind::DualPi2, {flow("prague"), flow("cubic")}, 1.0, SimTime::sec(60));
  s.sample_period = SimTime::ms(100);
  Dumbbell d(s, 4);
  d.run(s.duration);
  for (std::uint32_t f = 0; f < 2; ++f) {
    std::size_t n = 0;
    double bytes = 0.0;
    for (const auto& x : d.timeseries()) {
      if (x.flow != f) continue;
      ++n;
      bytes += x.throughput_mbps * 1e6 * 0.1 / 8.0;
    }
    EXPECT_EQ(n, 600u);
    EXPECT_NEAR(bytes, static_cast<double>(d.counters(f).unique_bytes), 600.0 * kPayload);
  }
}

TEST(Timeseries, IdleFlowReportsZero) {
  Scenario s = scenario(aqm::QueueKind::Fifo, {flow("cubic"), flow("reno")}, 1.0, SimTime::sec(2));
  s.flows[1].start_at = SimTime::sec(100);
  s.sample_period = SimTime::ms(100);
  Dumbbell d(s, 1);
  d.run(s.duration);
  std::size_t n = 0;
  for (const auto& x : d.timeseries()) {
    if (x.flow != 1) continue;
    ++n;
    EXPECT_EQ(x.throughput_mbps, 0.0);
  }
  EXPECT_EQ(n, 20u);
}
