#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "l4sim/core/packet.hpp"
#include "l4sim/core/sim_time.hpp"

namespace l4sim::aqm {

enum class QueueKind : std::uint8_t { Fifo, FifoEcn, Codel, Fq, FqCodel, DualPi2 };

constexpr std::string_view to_string(QueueKind k) {
  switch (k) {
    case QueueKind::Fifo: return "fifo";
    case QueueKind::FifoEcn: return "fifo-ecn";
    case QueueKind::Codel: return "codel";
    case QueueKind::Fq: return "fq";
    case QueueKind::FqCodel: return "fq-codel";
    case QueueKind::DualPi2: return "dualpi2";
  }
  return "?";
}

inline std::optional<QueueKind> parse_queue_kind(std::string_view s) {
  for (auto k : {QueueKind::Fifo, QueueKind::FifoEcn, QueueKind::Codel, QueueKind::Fq, QueueKind::FqCodel,
                 QueueKind::DualPi2})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

struct DualPi2Config {
  SimTime pi_target = SimTime::ms(5);
  SimTime step_thresh = SimTime::ms(1);
  SimTime t_update = SimTime::ms(16);
  // Integral and proportional gains, applied once per t_update to delays in
  // seconds. The defaults already include the t_update factor.
  double alpha = 0.16;
  double beta = 3.2;
  double k = 2.0;  // coupling factor
  // Time-shifted FIFO: the classic head is served only when it has waited at
  // least `tshift` longer than the L4S head.
  SimTime tshift = SimTime::ms(10);
};

struct QueueConfig {
  QueueKind kind = QueueKind::Fifo;
  std::uint64_t buffer_limit = 125'000;  // bytes
  SimTime ecn_threshold = SimTime::ms(5);
  SimTime codel_target = SimTime::ms(5);
  SimTime codel_interval = SimTime::ms(100);
  std::uint32_t fq_quantum = kMss;
  DualPi2Config dualpi2;

  void validate() const {
    if (buffer_limit == 0) throw std::invalid_argument("buffer_limit must be > 0");
    if (!(dualpi2.step_thresh < dualpi2.pi_target)) throw std::invalid_argument("step_thresh must be < pi_target");
    if (dualpi2.k <= 0.0) throw std::invalid_argument("coupling factor must be > 0");
    if (fq_quantum == 0) throw std::invalid_argument("fq_quantum must be > 0");
  }
};

enum class Verdict : std::uint8_t { Accept, Drop };

struct EnqueueVerdict {
  Verdict verdict = Verdict::Accept;
  bool mark_on_enqueue = false;
  std::vector<Packet> evicted;  // already-buffered packets pushed out to make room
};

struct DequeueResult {
  std::optional<Packet> packet;
  bool marked = false;
  std::vector<Packet> dropped;  // AQM drops made while looking for a packet to send
};

// Byte conservation: offered_bytes == delivered_bytes + dropped_bytes + bytes().
struct QueueStats {
  std::uint64_t offered_bytes = 0;
  std::uint64_t delivered_bytes = 0;
  std::uint64_t dropped_bytes = 0;
  std::uint64_t marks = 0;
  std::uint64_t tail_drops = 0;
  std::uint64_t aqm_drops = 0;
  std::uint64_t max_occupancy = 0;
};

class QueueDiscipline {
 public:
  virtual ~QueueDiscipline() = default;

  virtual EnqueueVerdict enqueue(Packet pkt, SimTime now) = 0;
  virtual DequeueResult dequeue(SimTime now) = 0;
  virtual std::uint64_t bytes() const = 0;
  virtual std::size_t packets() const = 0;
  bool empty() const { return packets() == 0; }

  // Periodic controller update (DualPI2's PI loop); nullopt when unused.
  virtual std::optional<SimTime> timer_interval() const { return std::nullopt; }
  virtual void on_timer(SimTime) {}

  const QueueStats& stats() const { return stats_; }
  const QueueConfig& config() const { return cfg_; }

 protected:
  explicit QueueDiscipline(QueueConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  void note_enqueue(std::uint32_t size) {
    stats_.offered_bytes += size;
    if (bytes() > stats_.max_occupancy) stats_.max_occupancy = bytes();
  }
  // Arriving packet refused at the tail.
  void note_rejected(const Packet& p) {
    stats_.offered_bytes += p.size;
    note_tail_drop(p);
  }
  // Buffered packet discarded to make room (or an arriving one, via note_rejected).
  void note_tail_drop(const Packet& p) {
    ++stats_.tail_drops;
    stats_.dropped_bytes += p.size;
  }
  void note_aqm_drop(const Packet& p) {
    ++stats_.aqm_drops;
    stats_.dropped_bytes += p.size;
  }
  void note_mark() { ++stats_.marks; }
  void note_delivery(const Packet& p) { stats_.delivered_bytes += p.size; }

  // Marks ECN-capable packets; returns false (caller drops) for NotECT.
  bool mark_or_refuse(Packet& p) {
    if (!is_ect(p.ecn)) return false;
    p.mark_ce();
    note_mark();
    return true;
  }

  QueueConfig cfg_;
  QueueStats stats_;
};

// Byte-accounted FIFO used as the building block of every discipline.
class ByteFifo {
 public:
  void push(Packet p) {
    bytes_ += p.size;
    q_.push_back(std::move(p));
  }
  Packet pop() {
    Packet p = std::move(q_.front());
    q_.pop_front();
    bytes_ -= p.size;
    return p;
  }
  const Packet& front() const { return q_.front(); }
  bool empty() const { return q_.empty(); }
  std::size_t size() const { return q_.size(); }
  std::uint64_t bytes() const { return bytes_; }
  SimTime head_sojourn(SimTime now) const { return q_.empty() ? SimTime{} : saturating_sub(now, q_.front().enqueued_at); }

 private:
  std::deque<Packet> q_;
  std::uint64_t bytes_ = 0;
};

}  // namespace l4sim::aqm
