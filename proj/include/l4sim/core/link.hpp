#pragma once

#include <cstdint>
#include <stdexcept>

#include "l4sim/core/packet.hpp"
#include "l4sim/core/sim_time.hpp"

namespace l4sim {

// Point-to-point link. One packet serializes at a time; packets are never reordered.
struct Link {
  std::uint64_t rate_bps = 0;
  SimTime propagation_delay{};
  SimTime busy_until{};

  Link() = default;
  Link(std::uint64_t rate, SimTime prop) : rate_bps(rate), propagation_delay(prop) {
    if (rate == 0) throw std::invalid_argument("Link rate must be > 0");
  }

  // Returns the arrival time at the far end and books the serializer.
  SimTime transmit(const Packet& pkt, SimTime now) {
    if (pkt.size == 0) throw std::invalid_argument("Link::transmit: empty packet");
    const SimTime start = busy_until > now ? busy_until : now;
    busy_until = start + serialization_time(pkt.size, rate_bps);
    return busy_until + propagation_delay;
  }

  bool idle(SimTime now) const { return busy_until <= now; }
};

inline SimTime link_transmit(Link& link, const Packet& pkt, SimTime now) { return link.transmit(pkt, now); }

}  // namespace l4sim
