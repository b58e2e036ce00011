#pragma once

#include <algorithm>
#include <array>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "l4sim/expcli/csv.hpp"

namespace l4sim::expcli {

enum class BufferType : std::uint8_t { SqNoEcn, SqEcn, FqEcn, DualPi2 };
enum class Opponent : std::uint8_t { Cubic, BbrV2 };
enum class Verdict : std::uint8_t { Ok, NotOk, InsufficientData };

inline constexpr std::array<BufferType, 4> kBufferTypes = {BufferType::SqNoEcn, BufferType::SqEcn, BufferType::FqEcn,
                                                           BufferType::DualPi2};
inline constexpr std::array<Opponent, 2> kOpponents = {Opponent::Cubic, Opponent::BbrV2};

constexpr std::string_view to_string(BufferType b) {
  switch (b) {
    case BufferType::SqNoEcn: return "SQ w/o ECN";
    case BufferType::SqEcn: return "SQ + ECN";
    case BufferType::FqEcn: return "FQ + ECN";
    case BufferType::DualPi2: return "DualPI2";
  }
  return "?";
}

constexpr std::string_view to_string(Opponent o) { return o == Opponent::Cubic ? "Cubic" : "BBRv2"; }

constexpr std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Ok: return "OK";
    case Verdict::NotOk: return "NotOK";
    case Verdict::InsufficientData: return "insufficient data";
  }
  return "?";
}

inline bool queue_in(BufferType b, std::string_view queue) {
  switch (b) {
    case BufferType::SqNoEcn: return queue == "fifo";
    case BufferType::SqEcn: return queue == "fifo-ecn" || queue == "codel";
    case BufferType::FqEcn: return queue == "fq" || queue == "fq-codel";
    case BufferType::DualPi2: return queue == "dualpi2";
  }
  return false;
}

inline bool opponent_is(Opponent o, std::string_view cc) { return cc == (o == Opponent::Cubic ? "cubic" : "bbr2"); }

struct Violation {
  std::string scenario;
  double buffer_bdp = 0.0;
  double share_a = 0.0;
};

struct RecommendationCell {
  BufferType buffer = BufferType::SqNoEcn;
  Opponent opponent = Opponent::Cubic;
  bool fallback = false;
  Verdict verdict = Verdict::InsufficientData;
  std::size_t cells_considered = 0;
  double min_share = 1.0;  // smallest of the two shares over all matching cells
  std::vector<Violation> violations;
};

struct Recommendation {
  double fair_lo = 0.35;
  std::vector<RecommendationCell> cells;  // row-major: buffer type, opponent, fallback off/on

  const RecommendationCell& at(BufferType b, Opponent o, bool fallback) const {
    for (const auto& c : cells)
      if (c.buffer == b && c.opponent == o && c.fallback == fallback) return c;
    throw std::out_of_range("recommendation cell");
  }
};

// OK iff no matching Prague-vs-opponent cell, at any buffer multiple, leaves
// either flow with less than `fair_lo` of the combined throughput.
inline Recommendation recommend(const std::vector<ResultRow>& rows, double fair_lo = 0.35) {
  if (!(fair_lo >= 0.0 && fair_lo <= 0.5)) throw std::invalid_argument("fair_lo must lie in [0, 0.5]");
  Recommendation rec;
  rec.fair_lo = fair_lo;
  for (auto b : kBufferTypes)
    for (auto o : kOpponents)
      for (bool fb : {false, true}) {
        RecommendationCell cell;
        cell.buffer = b;
        cell.opponent = o;
        cell.fallback = fb;
        for (const auto& r : rows) {
          if (r.seed != "mean" || r.flow_a_cc != "prague") continue;
          if (!queue_in(b, r.queue) || !opponent_is(o, r.flow_b_cc)) continue;
          if ((r.flow_a_fallback == "on") != fb) continue;
          ++cell.cells_considered;
          const double low = std::min(r.share_a, 1.0 - r.share_a);
          cell.min_share = std::min(cell.min_share, low);
          if (low < fair_lo) cell.violations.push_back({r.scenario, r.buffer_bdp, r.share_a});
        }
        if (cell.cells_considered == 0)
          cell.verdict = Verdict::InsufficientData;
        else
          cell.verdict = cell.violations.empty() ? Verdict::Ok : Verdict::NotOk;
        rec.cells.push_back(std::move(cell));
      }
  return rec;
}

inline void print_recommendation(std::ostream& os, const Recommendation& rec) {
  os << "Is it okay to turn on TCP Prague? (OK iff min share >= " << rec.fair_lo << " at every buffer size)\n";
  os << std::left << std::setw(12) << "Buffer type";
  for (bool fb : {false, true})
    for (auto o : kOpponents)
      os << std::setw(20) << (std::string(fb ? "FB on " : "FB off ") + std::string(to_string(o)));
  os << '\n';
  for (auto b : kBufferTypes) {
    os << std::setw(12) << to_string(b);
    for (bool fb : {false, true})
      for (auto o : kOpponents) os << std::setw(20) << to_string(rec.at(b, o, fb).verdict);
    os << '\n';
  }
  bool header = false;
  for (const auto& c : rec.cells) {
    for (const auto& v : c.violations) {
      if (!header) {
        os << "\nCells below the floor:\n";
        header = true;
      }
      std::ostringstream share;
      share << std::fixed << std::setprecision(3) << v.share_a;
      os << "  " << to_string(c.buffer) << " / " << to_string(c.opponent) << " / fallback "
         << (c.fallback ? "on" : "off") << ": " << v.scenario << " (buffer " << format_number(v.buffer_bdp)
         << " BDP, Prague share " << share.str() << ")\n";
    }
  }
}

}  // namespace l4sim::expcli
