#pragma once

#include <array>
#include <functional>

namespace l4sim::cc {

// Running min/max over a sliding window using three candidate samples
// (Kathleen Nichols' algorithm, as used by BBR). `Better(a, b)` is true when
// `a` should replace `b` as the best estimate; ties favour the newer sample.
template <typename Value, typename Time, typename Better>
class WindowedFilter {
 public:
  explicit WindowedFilter(Time window) : window_(window) {}

  void reset(Value v, Time t) { samples_.fill(Sample{v, t}); valid_ = true; }

  Value update(Value v, Time t) {
    const Sample s{v, t};
    if (!valid_ || !Better{}(samples_[0].v, v) || t - samples_[2].t > window_) {
      reset(v, t);
      return samples_[0].v;
    }
    if (!Better{}(samples_[1].v, v)) {
      samples_[1] = s;
      samples_[2] = s;
    } else if (!Better{}(samples_[2].v, v)) {
      samples_[2] = s;
    }
    return subwin_update(s);
  }

  Value best() const { return samples_[0].v; }
  bool valid() const { return valid_; }
  void invalidate() { valid_ = false; }

 private:
  struct Sample {
    Value v;
    Time t;
  };

  Value subwin_update(const Sample& s) {
    const Time dt = s.t - samples_[0].t;
    if (dt > window_) {
      samples_[0] = samples_[1];
      samples_[1] = samples_[2];
      samples_[2] = s;
      if (s.t - samples_[0].t > window_) {
        samples_[0] = samples_[1];
        samples_[1] = samples_[2];
        samples_[2] = s;
      }
    } else if (samples_[1].t == samples_[0].t && dt > window_ / 4) {
      samples_[2] = samples_[1] = s;
    } else if (samples_[2].t == samples_[1].t && dt > window_ / 2) {
      samples_[2] = s;
    }
    return samples_[0].v;
  }

  Time window_;
  std::array<Sample, 3> samples_{};
  bool valid_ = false;
};

template <typename Value, typename Time>
using MaxFilter = WindowedFilter<Value, Time, std::greater<Value>>;

template <typename Value, typename Time>
using MinFilter = WindowedFilter<Value, Time, std::less<Value>>;

}  // namespace l4sim::cc
