#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "l4sim/core/sim_time.hpp"

namespace l4sim::cc {

enum class QueueClass : std::uint8_t { Undecided, L4SQueue, ClassicQueue };

constexpr std::string_view to_string(QueueClass c) {
  switch (c) {
    case QueueClass::Undecided: return "undecided";
    case QueueClass::L4SQueue: return "l4s";
    case QueueClass::ClassicQueue: return "classic";
  }
  return "?";
}

struct FallbackConfig {
  SimTime variation_threshold = SimTime::ms(2);
  std::uint32_t evaluation_rounds = 8;
  // When set, every evaluation yields this class regardless of the samples.
  std::optional<QueueClass> forced;
};

// Classifies the bottleneck as a shared classic ECN queue or an L4S queue from
// the spread of RTT samples. A window opens at a CE mark and closes after
// `evaluation_rounds` rounds; the next window opens at the next CE mark.
class FallbackDetector {
 public:
  explicit FallbackDetector(FallbackConfig cfg = {}) : cfg_(cfg) {}

  void on_mark() { armed_ = true; }
  bool armed() const { return armed_; }

  QueueClass observe(SimTime rtt_sample, bool round_ended) {
    if (!armed_) return cls_;
    if (rtt_sample > SimTime{}) {
      if (rtt_sample < lo_) lo_ = rtt_sample;
      if (rtt_sample > hi_) hi_ = rtt_sample;
      have_samples_ = true;
    }
    if (round_ended && ++rounds_ >= cfg_.evaluation_rounds) {
      if (cfg_.forced) {
        cls_ = *cfg_.forced;
      } else if (have_samples_) {
        cls_ = (hi_ - lo_) > cfg_.variation_threshold ? QueueClass::ClassicQueue : QueueClass::L4SQueue;
      }
      ++evaluations_;
      reset_window();
      armed_ = false;
    }
    return cls_;
  }

  QueueClass classification() const { return cls_; }
  std::uint64_t evaluations() const { return evaluations_; }
  const FallbackConfig& config() const { return cfg_; }

 private:
  void reset_window() {
    lo_ = SimTime::max();
    hi_ = SimTime{};
    rounds_ = 0;
    have_samples_ = false;
  }

  FallbackConfig cfg_;
  bool armed_ = false;
  bool have_samples_ = false;
  std::uint32_t rounds_ = 0;
  SimTime lo_ = SimTime::max();
  SimTime hi_{};
  QueueClass cls_ = QueueClass::Undecided;
  std::uint64_t evaluations_ = 0;
};

// One step of the detector as a free function over an explicit state.
inline QueueClass fallback_classify(FallbackDetector& d, SimTime rtt_sample, bool round_ended) {
  return d.observe(rtt_sample, round_ended);
}

}  // namespace l4sim::cc
