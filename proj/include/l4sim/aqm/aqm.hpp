#pragma once

#include <memory>

#include "l4sim/aqm/codel.hpp"
#include "l4sim/aqm/dualpi2.hpp"
#include "l4sim/aqm/fifo.hpp"
#include "l4sim/aqm/fq.hpp"
#include "l4sim/aqm/queue_discipline.hpp"

namespace l4sim::aqm {

inline std::unique_ptr<QueueDiscipline> make_queue(const QueueConfig& cfg) {
  switch (cfg.kind) {
    case QueueKind::Fifo: return std::make_unique<Fifo>(cfg, false);
    case QueueKind::FifoEcn: return std::make_unique<Fifo>(cfg, true);
    case QueueKind::Codel: return std::make_unique<Codel>(cfg);
    case QueueKind::Fq: return std::make_unique<FairQueue>(cfg, false);
    case QueueKind::FqCodel: return std::make_unique<FairQueue>(cfg, true);
    case QueueKind::DualPi2: return std::make_unique<DualPi2>(cfg);
  }
  throw std::invalid_argument("unknown queue kind");
}

}  // namespace l4sim::aqm
