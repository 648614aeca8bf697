#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace gnnctrl {

// Deterministic random stream built on the splitmix64 state transition.
// Identical (seed, stream_id) pairs produce bitwise-identical sequences on
// every platform; distinct stream ids give independent streams for the same
// seed, which is how per-realization and per-purpose streams are derived.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id) {
    state_ = mix(mix(seed ^ 0x8f14b5c03f7aa3e1ULL) + stream_id);
    // Decorrelate streams whose (seed, id) pairs are numerically close.
    state_ = mix(state_ + 0x9e3779b97f4a7c15ULL * mix(stream_id));
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  // Independent stream for a sub-purpose (e.g. one realization, one epoch).
  RngStream substream(std::uint64_t key) const {
    return RngStream(seed_, mix(stream_id_ + 0x9e3779b97f4a7c15ULL * (key + 1)));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform on [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Integer uniform on [0, n) via rejection-free multiply-shift; n > 0.
  std::uint64_t uniform_index(std::uint64_t n) {
    // 128-bit multiply keeps the map exactly uniform enough for shuffling
    // small index ranges; bias is < 2^-64 * n which is negligible here.
    unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * n;
    return static_cast<std::uint64_t>(wide >> 64);
  }

  // Standard normal via Box-Muller; the paired draw is cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    // 1 - uniform() lies in (0, 1], keeping the logarithm finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

  static constexpr const char* algorithm() noexcept {
    return "splitmix64+box-muller";
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace gnnctrl
