#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace l4sim {

// Virtual clock value: integer nanoseconds since simulation start.
// Arithmetic is checked; overflow or underflow throws instead of wrapping.
class SimTime {
 public:
  using rep = std::uint64_t;

  constexpr SimTime() = default;
  constexpr explicit SimTime(rep ns) : ns_(ns) {}

  static constexpr SimTime ns(rep v) { return SimTime(v); }
  static constexpr SimTime us(rep v) { return SimTime(checked_mul(v, 1'000)); }
  static constexpr SimTime ms(rep v) { return SimTime(checked_mul(v, 1'000'000)); }
  static constexpr SimTime sec(rep v) { return SimTime(checked_mul(v, 1'000'000'000)); }

  // Rounds to the nearest nanosecond; negative input is an error.
  static constexpr SimTime from_seconds(double s) {
    if (!(s >= 0.0) || s > 1.8e10) throw std::out_of_range("SimTime::from_seconds: out of range");
    return SimTime(static_cast<rep>(s * 1e9 + 0.5));
  }
  static constexpr SimTime from_ms(double v) { return from_seconds(v * 1e-3); }

  static constexpr SimTime max() { return SimTime(std::numeric_limits<rep>::max()); }

  constexpr rep count() const { return ns_; }
  constexpr double seconds() const { return static_cast<double>(ns_) * 1e-9; }
  constexpr double millis() const { return static_cast<double>(ns_) * 1e-6; }

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime& operator+=(SimTime o) {
    if (ns_ > std::numeric_limits<rep>::max() - o.ns_) throw std::overflow_error("SimTime overflow");
    ns_ += o.ns_;
    return *this;
  }
  constexpr SimTime& operator-=(SimTime o) {
    if (o.ns_ > ns_) throw std::underflow_error("SimTime underflow");
    ns_ -= o.ns_;
    return *this;
  }
  friend constexpr SimTime operator+(SimTime a, SimTime b) { return a += b; }
  friend constexpr SimTime operator-(SimTime a, SimTime b) { return a -= b; }
  friend constexpr SimTime operator*(SimTime a, rep k) { return SimTime(checked_mul(a.ns_, k)); }
  friend constexpr SimTime operator/(SimTime a, rep k) { return SimTime(a.ns_ / k); }

  // a - b clamped at zero.
  friend constexpr SimTime saturating_sub(SimTime a, SimTime b) {
    return a.ns_ > b.ns_ ? SimTime(a.ns_ - b.ns_) : SimTime();
  }

 private:
  static constexpr rep checked_mul(rep a, rep b) {
    if (b != 0 && a > std::numeric_limits<rep>::max() / b) throw std::overflow_error("SimTime overflow");
    return a * b;
  }

  rep ns_ = 0;
};

__extension__ using uint128 = unsigned __int128;

// Time to serialize `bytes` onto a link of `bits_per_second`, rounded to the nearest ns.
constexpr SimTime serialization_time(std::uint64_t bytes, std::uint64_t bits_per_second) {
  if (bits_per_second == 0) throw std::invalid_argument("link rate must be > 0");
  const uint128 num = static_cast<uint128>(bytes) * 8u * 1'000'000'000u;
  return SimTime(static_cast<SimTime::rep>((num + bits_per_second / 2) / bits_per_second));
}

}  // namespace l4sim
