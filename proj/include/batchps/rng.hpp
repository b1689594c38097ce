#pragma once

// Counter-based random streams: every (seed, stream id) pair owns an
// independent SplitMix64 sequence, so replications can run in any order.

#include <cmath>
#include <cstdint>

namespace batchps {

inline std::uint64_t splitmix_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class RandomStream {
 public:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  RandomStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t domain = 0) noexcept
      : state_(splitmix_mix(seed ^ splitmix_mix(stream * kGolden + splitmix_mix(domain + 1)))) {}

  std::uint64_t next() noexcept {
    state_ += kGolden;
    return splitmix_mix(state_);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  double exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

  /// P(k) = (1 - q) q^(k-1), k >= 1.
  std::uint64_t geometric(double q) noexcept {
    return 1 + static_cast<std::uint64_t>(std::floor(std::log(uniform()) / std::log(q)));
  }

  /// Uniform on {0, ..., n-1}, n >= 1 (Lemire's multiply-shift with rejection).
  std::uint64_t below(std::uint64_t n) noexcept {
    __uint128_t m = static_cast<__uint128_t>(next()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<__uint128_t>(next()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::uint64_t state_;
};

}  // namespace batchps
