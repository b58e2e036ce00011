#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace l4sim::expcli {

inline constexpr std::array<std::string_view, 18> kResultColumns = {
    "scenario",   "queue",        "buffer_bdp",   "flow_a_cc",   "flow_a_ecn",  "flow_a_fallback",
    "flow_b_cc",  "flow_b_ecn",   "seed",         "throughput_a", "throughput_b", "share_a",
    "qdelay_a_ms", "qdelay_b_ms", "rtt_a_ms",     "rtt_b_ms",    "marks",       "drops"};

// One CSV line. `seed` holds the seed number, "mean" or "std".
struct ResultRow {
  std::string scenario;
  std::string queue;
  double buffer_bdp = 0.0;
  std::string flow_a_cc;
  std::string flow_a_ecn;
  std::string flow_a_fallback;  // "on" / "off"
  std::string flow_b_cc;        // "none" for single-flow runs
  std::string flow_b_ecn;
  std::string seed;
  double throughput_a = 0.0;  // Mb/s
  double throughput_b = 0.0;
  double share_a = 0.0;
  double qdelay_a_ms = 0.0;
  double qdelay_b_ms = 0.0;
  double rtt_a_ms = 0.0;
  double rtt_b_ms = 0.0;
  double marks = 0.0;  // both flows
  double drops = 0.0;

  bool is_aggregate() const { return seed == "mean" || seed == "std"; }
  bool operator==(const ResultRow&) const = default;
};

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest representation that parses back to the same double.
inline std::string format_number(double v) {
  if (!std::isfinite(v)) throw CsvError("non-finite value in result row");
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw CsvError("number formatting failed");
  return std::string(buf.data(), end);
}

inline double parse_number(std::string_view s) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size() || !std::isfinite(v))
    throw CsvError("invalid number '" + std::string(s) + "'");
  return v;
}

inline void write_header(std::ostream& os) {
  for (std::size_t i = 0; i < kResultColumns.size(); ++i) os << (i ? "," : "") << kResultColumns[i];
  os << '\n';
}

inline void write_row(std::ostream& os, const ResultRow& r) {
  os << r.scenario << ',' << r.queue << ',' << format_number(r.buffer_bdp) << ',' << r.flow_a_cc << ','
     << r.flow_a_ecn << ',' << r.flow_a_fallback << ',' << r.flow_b_cc << ',' << r.flow_b_ecn << ',' << r.seed << ','
     << format_number(r.throughput_a) << ',' << format_number(r.throughput_b) << ',' << format_number(r.share_a) << ','
     << format_number(r.qdelay_a_ms) << ',' << format_number(r.qdelay_b_ms) << ',' << format_number(r.rtt_a_ms) << ','
     << format_number(r.rtt_b_ms) << ',' << format_number(r.marks) << ',' << format_number(r.drops) << '\n';
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::vector<ResultRow> read_results(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw CsvError("empty results file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header.size() != kResultColumns.size()) throw CsvError("unexpected header");
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] != kResultColumns[i]) throw CsvError("unexpected column '" + header[i] + "'");

  std::vector<ResultRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != kResultColumns.size())
      throw CsvError("line " + std::to_string(lineno) + ": expected " + std::to_string(kResultColumns.size()) + " fields");
    try {
      ResultRow r;
      r.scenario = f[0];
      r.queue = f[1];
      r.buffer_bdp = parse_number(f[2]);
      r.flow_a_cc = f[3];
      r.flow_a_ecn = f[4];
      r.flow_a_fallback = f[5];
      r.flow_b_cc = f[6];
      r.flow_b_ecn = f[7];
      r.seed = f[8];
      r.throughput_a = parse_number(f[9]);
      r.throughput_b = parse_number(f[10]);
      r.share_a = parse_number(f[11]);
      r.qdelay_a_ms = parse_number(f[12]);
      r.qdelay_b_ms = parse_number(f[13]);
      r.rtt_a_ms = parse_number(f[14]);
      r.rtt_b_ms = parse_number(f[15]);
      r.marks = parse_number(f[16]);
      r.drops = parse_number(f[17]);
      rows.push_back(std::move(r));
    } catch (const CsvError& e) {
      throw CsvError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace l4sim::expcli
